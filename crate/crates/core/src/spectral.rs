//! Multi-dimensional discrete Fourier transforms and circular convolution.
//!
//! Conventions: the forward transform is unnormalized,
//! `X_k = Σ_t x_t exp(-2πi·kt/T)`, applied along every axis in turn; the
//! inverse carries the full `1/P` factor, where `P` is the total element
//! count. Any axis length is accepted (rustfft picks mixed-radix, Rader or
//! Bluestein plans as needed).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LcrError, Result};
use crate::grid::{ComplexGrid, DataGrid, Grid, Shape};
use crate::parallel::{self, Execution};

/// Relative bound on the imaginary part left after an inverse transform of a
/// spectrum that should be conjugate-symmetric.
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

/// Reusable forward/inverse plans for one grid shape.
#[derive(Clone)]
pub struct FftPlan {
    shape: Shape,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    exec: Execution,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan")
            .field("shape", &self.shape)
            .field("exec", &self.exec)
            .finish()
    }
}

impl FftPlan {
    pub fn new(shape: &Shape) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.dims().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.dims().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        FftPlan {
            shape: shape.clone(),
            forward,
            inverse,
            exec: Execution::default(),
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.shape.len(), "buffer does not match plan shape");
        for (axis, fft) in self.forward.iter().enumerate() {
            transform_axis(data, self.shape.dims(), axis, fft.as_ref(), self.exec);
        }
    }

    /// Inverse transform including the `1/P` normalization.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.shape.len(), "buffer does not match plan shape");
        for (axis, fft) in self.inverse.iter().enumerate() {
            transform_axis(data, self.shape.dims(), axis, fft.as_ref(), self.exec);
        }
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward(&self, grid: &DataGrid) -> ComplexGrid {
        let mut out = grid.to_complex();
        self.forward_in_place(out.as_mut_slice());
        out
    }

    pub fn forward_complex(&self, grid: &ComplexGrid) -> ComplexGrid {
        let mut out = grid.clone();
        self.forward_in_place(out.as_mut_slice());
        out
    }

    pub fn inverse(&self, spectrum: &ComplexGrid) -> ComplexGrid {
        let mut out = spectrum.clone();
        self.inverse_in_place(out.as_mut_slice());
        out
    }
}

/// Applies a 1D transform to every line of `data` along `axis`.
fn transform_axis(
    data: &mut [Complex64],
    dims: &[usize],
    axis: usize,
    fft: &dyn Fft<f64>,
    exec: Execution,
) {
    let len = dims[axis];
    if len == 1 {
        return;
    }
    let inner: usize = dims[axis + 1..].iter().product();
    let lines = data.len() / len;

    if inner == 1 {
        batched_lines(data, len, lines, fft, exec);
        return;
    }

    // Strided axis: transpose each outer block so the lines become contiguous.
    let block = len * inner;
    let mut buf = vec![Complex64::new(0.0, 0.0); block];
    for chunk in data.chunks_mut(block) {
        for i in 0..len {
            for j in 0..inner {
                buf[j * len + i] = chunk[i * inner + j];
            }
        }
        batched_lines(&mut buf, len, inner, fft, exec);
        for i in 0..len {
            for j in 0..inner {
                chunk[i * inner + j] = buf[j * len + i];
            }
        }
    }
}

fn batched_lines(data: &mut [Complex64], len: usize, lines: usize, fft: &dyn Fft<f64>, exec: Execution) {
    let per_task = parallel::lines_per_task(exec, lines);
    let scratch_len = fft.get_inplace_scratch_len();
    parallel::for_each_chunk_mut(exec, data, per_task * len, |chunk| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        fft.process_with_scratch(chunk, &mut scratch);
    });
}

/// Forward transform of a real grid along all axes.
pub fn dft(grid: &DataGrid) -> ComplexGrid {
    FftPlan::new(grid.shape()).forward(grid)
}

/// Forward transform of a complex grid along all axes.
pub fn dft_complex(grid: &ComplexGrid) -> ComplexGrid {
    FftPlan::new(grid.shape()).forward_complex(grid)
}

/// Inverse transform with `1/P` normalization, so `idft(dft(g)) == g`.
pub fn idft(spectrum: &ComplexGrid) -> ComplexGrid {
    FftPlan::new(spectrum.shape()).inverse(spectrum)
}

/// Real grid recovered from an inverse transform, together with the largest
/// imaginary magnitude that was dropped.
#[derive(Clone, Debug)]
pub struct RealPart {
    pub grid: DataGrid,
    pub imaginary_residue: f64,
}

/// Keeps the real part of a time-domain complex grid, failing when the
/// imaginary part is not negligible relative to the real part.
pub fn real_part(values: &ComplexGrid) -> Result<RealPart> {
    let mut grid = DataGrid::zeros(values.shape().clone());
    let imaginary_residue = split_real(values.as_slice(), grid.as_mut_slice())?;
    Ok(RealPart {
        grid,
        imaginary_residue,
    })
}

/// Writes the real parts of `values` into `out` and returns the largest
/// imaginary magnitude, under the same acceptance rule as [`real_part`].
pub(crate) fn split_real(values: &[Complex64], out: &mut [f64]) -> Result<f64> {
    let mut residue = 0.0_f64;
    let mut real_max = 0.0_f64;
    for (v, o) in values.iter().zip(out.iter_mut()) {
        residue = residue.max(v.im.abs());
        real_max = real_max.max(v.re.abs());
        *o = v.re;
    }
    if residue > IMAGINARY_RESIDUE_LIMIT * real_max {
        return Err(LcrError::ImaginaryResidueTooLarge { residue, real_max });
    }
    Ok(residue)
}

/// `Re(idft(spectrum))`, for spectra built from transforms of real grids.
pub fn real_part_of_idft(spectrum: &ComplexGrid) -> Result<RealPart> {
    real_part(&idft(spectrum))
}

/// Places `kernel` in the leading corner of a zero grid of shape `shape`.
pub fn zero_extend(kernel: &DataGrid, shape: &Shape) -> Result<DataGrid> {
    if kernel.rank() != shape.rank() {
        return Err(LcrError::ShapeMismatch(format!(
            "kernel rank {} differs from data rank {}",
            kernel.rank(),
            shape.rank()
        )));
    }
    if kernel.dims().iter().zip(shape.dims()).any(|(k, n)| k > n) {
        return Err(LcrError::ShapeMismatch(format!(
            "kernel {} exceeds data {}",
            kernel.shape(),
            shape
        )));
    }
    if kernel.shape() == shape {
        return Ok(kernel.clone());
    }
    let mut out = DataGrid::zeros(shape.clone());
    for flat in 0..kernel.len() {
        let index = kernel.shape().unravel(flat);
        out.set(&index, kernel.as_slice()[flat]);
    }
    Ok(out)
}

/// Circular convolution `k ⋆ x` computed as `idft(dft(x) ∘ dft(k))`.
///
/// Kernels shorter than the data along some axis are zero-extended first.
pub fn circular_convolve(x: &DataGrid, kernel: &DataGrid) -> Result<DataGrid> {
    let kernel = zero_extend(kernel, x.shape())?;
    let plan = FftPlan::new(x.shape());
    let mut product = plan.forward(x);
    let kernel_hat = plan.forward(&kernel);
    product
        .as_mut_slice()
        .iter_mut()
        .zip(kernel_hat.as_slice())
        .for_each(|(a, b)| *a *= b);
    plan.inverse_in_place(product.as_mut_slice());
    // Products of real spectra are conjugate-symmetric; the residue here is
    // pure rounding.
    Ok(product.map(|v| v.re))
}

/// Entry-wise product of two spectra of equal shape.
pub fn hadamard(a: &ComplexGrid, b: &ComplexGrid) -> Result<ComplexGrid> {
    a.ensure_same_shape(b, "hadamard")?;
    let data = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).collect();
    Grid::from_vec(a.shape().clone(), data)
}

pub mod oracle {
    //! Brute-force references for checking the fast paths.
    use super::*;

    /// O(P²) multi-dimensional DFT by direct summation over all index pairs.
    pub fn naive_dft(grid: &ComplexGrid, sign: f64) -> ComplexGrid {
        let shape = grid.shape();
        let dims = shape.dims();
        let mut out = ComplexGrid::zeros(shape.clone());
        for k_flat in 0..shape.len() {
            let k = shape.unravel(k_flat);
            let mut acc = Complex64::new(0.0, 0.0);
            for t_flat in 0..shape.len() {
                let t = shape.unravel(t_flat);
                let phase: f64 = k
                    .iter()
                    .zip(&t)
                    .zip(dims)
                    .map(|((&ki, &ti), &n)| ((ki * ti) % n) as f64 / n as f64)
                    .sum();
                acc += grid.as_slice()[t_flat]
                    * Complex64::from_polar(1.0, sign * 2.0 * std::f64::consts::PI * phase);
            }
            out.as_mut_slice()[k_flat] = acc;
        }
        out
    }

    /// Direct wraparound sum `z[n] = Σ_i k[i] x[n - i mod N]` along all axes.
    pub fn direct_circular_convolution(x: &DataGrid, kernel: &DataGrid) -> DataGrid {
        let shape = x.shape();
        let dims = shape.dims();
        let mut out = DataGrid::zeros(shape.clone());
        for n_flat in 0..shape.len() {
            let n = shape.unravel(n_flat);
            let mut acc = 0.0;
            for k_flat in 0..kernel.len() {
                let i = kernel.shape().unravel(k_flat);
                let src: Vec<usize> = n
                    .iter()
                    .zip(&i)
                    .zip(dims)
                    .map(|((&a, &b), &len)| (a + len - b % len) % len)
                    .collect();
                acc += kernel.as_slice()[k_flat] * x.get(&src);
            }
            out.as_mut_slice()[n_flat] = acc;
        }
        out
    }
}
