//! ADMM in the Fourier domain for circulant nuclear norm minimisation with
//! a Laplacian smoothness penalty.

mod admm;
pub(crate) mod config;
mod ops;

pub use admm::{solve, SolveReport, SolverState};
pub use config::{
    Preset, PresetRule, SolverConfig, Variant, DEFAULT_ETA_RATIO, DEFAULT_MAX_ITER, DEFAULT_TAU, DEFAULT_TOL,
};
pub use ops::{circulant_nuclear_norm, complex_soft_threshold, h_update, objective, w_update, z_update};
