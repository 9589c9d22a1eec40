//! Laplacian convolutional representation: low-rank completion of series,
//! matrices and images through the nuclear norm of a circulant operator plus
//! a circular Laplacian smoothness penalty, solved by ADMM with every
//! subproblem in closed form in the Fourier domain.

pub mod error;
pub mod experiment;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod masking;
pub mod metrics;
pub mod parallel;
pub mod selftest;
pub mod solver;
pub mod spectral;

pub use error::{ErrorClass, LcrError, Result};
pub use grid::{ComplexGrid, DataGrid, Grid, Shape};
pub use masking::ObservationMask;
pub use solver::{solve, Preset, SolveReport, SolverConfig, Variant};
