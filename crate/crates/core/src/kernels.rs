//! Circular Laplacian kernels, separable multi-axis kernels, and small dense
//! circulant/convolution matrices.
//!
//! The solver only ever touches kernel vectors and their spectra. The dense
//! matrices are O(T²) in memory and exist as a diagnostic surface for
//! checking the matrix forms of the regularizer on small problems.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{LcrError, Result};
use crate::grid::{ComplexGrid, DataGrid, Grid, Shape};
use crate::spectral::{dft, zero_extend};

/// Anything usable as a circular convolution kernel against a data grid.
pub trait ConvolutionKernel {
    /// Kernel values in the time/space domain.
    fn grid(&self) -> Cow<'_, DataGrid>;

    /// Spectrum of the kernel zero-extended to `shape`.
    fn spectrum_for(&self, shape: &Shape) -> Result<ComplexGrid> {
        let kernel = self.grid();
        Ok(dft(&zero_extend(&kernel, shape)?))
    }
}

impl ConvolutionKernel for DataGrid {
    fn grid(&self) -> Cow<'_, DataGrid> {
        Cow::Borrowed(self)
    }
}

/// `(2τ, -1 × τ, 0, ..., 0, -1 × τ)`: first column of the Laplacian of an
/// undirected circulant graph where every node links to its τ nearest
/// neighbours on each side.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplacianKernel {
    values: DataGrid,
    tau: usize,
    spectrum: ComplexGrid,
}

impl LaplacianKernel {
    pub fn new(len: usize, tau: usize) -> Result<Self> {
        let values = laplacian_values(len, tau)?;
        let values = DataGrid::from_series(values)?;
        let mut spectrum = dft(&values);
        // Zero row sum: the DC bin is exactly zero.
        spectrum.as_mut_slice()[0] = Complex64::new(0.0, 0.0);
        Ok(LaplacianKernel {
            values,
            tau,
            spectrum,
        })
    }

    pub fn values(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cached `dft(values)`.
    pub fn spectrum(&self) -> &ComplexGrid {
        &self.spectrum
    }
}

impl ConvolutionKernel for LaplacianKernel {
    fn grid(&self) -> Cow<'_, DataGrid> {
        Cow::Borrowed(&self.values)
    }

    fn spectrum_for(&self, shape: &Shape) -> Result<ComplexGrid> {
        if shape == self.values.shape() {
            return Ok(self.spectrum.clone());
        }
        Ok(dft(&zero_extend(&self.values, shape)?))
    }
}

pub(crate) fn laplacian_values(len: usize, tau: usize) -> Result<Vec<f64>> {
    if len < 3 || tau == 0 || 2 * tau > len - 1 {
        return Err(LcrError::InvalidTau { tau, len });
    }
    let mut values = vec![0.0; len];
    values[0] = 2.0 * tau as f64;
    for k in 1..=tau {
        values[k] = -1.0;
        values[len - k] = -1.0;
    }
    Ok(values)
}

/// Convenience constructor mirroring [`LaplacianKernel::new`].
pub fn laplacian_kernel(len: usize, tau: usize) -> Result<LaplacianKernel> {
    LaplacianKernel::new(len, tau)
}

/// First column of the `n x n` identity: a kernel that leaves its axis alone.
pub fn spatial_unit_kernel(n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    if let Some(first) = e.first_mut() {
        *first = 1.0;
    }
    e
}

/// Outer product of per-axis kernels. Its spectrum is the outer product of
/// the per-axis spectra, which is how it is computed and cached.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableKernel {
    axis_kernels: Vec<Vec<f64>>,
    full_grid: DataGrid,
    spectrum: ComplexGrid,
}

impl SeparableKernel {
    pub fn from_axes(axis_kernels: Vec<Vec<f64>>) -> Result<Self> {
        let dims: Vec<usize> = axis_kernels.iter().map(Vec::len).collect();
        let shape = Shape::new(&dims)?;
        let full = outer_product(&shape, &axis_kernels, |v| v, 1.0);
        let axis_spectra: Vec<Vec<Complex64>> = axis_kernels
            .iter()
            .map(|k| dft(&DataGrid::from_series(k.clone()).expect("finite kernel")).into_vec())
            .collect();
        let spectrum = outer_product(&shape, &axis_spectra, |v| v, Complex64::new(1.0, 0.0));
        Ok(SeparableKernel {
            axis_kernels,
            full_grid: Grid::from_vec(shape.clone(), full)?,
            spectrum: Grid::from_vec(shape, spectrum)?,
        })
    }

    pub fn axis_kernels(&self) -> &[Vec<f64>] {
        &self.axis_kernels
    }

    pub fn full_grid(&self) -> &DataGrid {
        &self.full_grid
    }

    pub fn spectrum(&self) -> &ComplexGrid {
        &self.spectrum
    }
}

impl ConvolutionKernel for SeparableKernel {
    fn grid(&self) -> Cow<'_, DataGrid> {
        Cow::Borrowed(&self.full_grid)
    }

    fn spectrum_for(&self, shape: &Shape) -> Result<ComplexGrid> {
        if shape == self.full_grid.shape() {
            return Ok(self.spectrum.clone());
        }
        Ok(dft(&zero_extend(&self.full_grid, shape)?))
    }
}

fn outer_product<T, F>(shape: &Shape, axes: &[Vec<T>], map: F, one: T) -> Vec<T>
where
    T: Copy + std::ops::Mul<Output = T>,
    F: Fn(T) -> T,
{
    (0..shape.len())
        .map(|flat| {
            shape
                .unravel(flat)
                .iter()
                .zip(axes)
                .fold(one, |acc, (&i, axis)| acc * map(axis[i]))
        })
        .collect()
}

/// `e₁(N) ⊗ ℓ(T, τ)`: no coupling across series, Laplacian along time.
pub fn separable_kernel_2d(n: usize, t: usize, tau: usize) -> Result<SeparableKernel> {
    if n == 0 {
        return Err(LcrError::InvalidShape("zero series".into()));
    }
    let temporal = laplacian_values(t, tau)?;
    SeparableKernel::from_axes(vec![spatial_unit_kernel(n), temporal])
}

/// Number of colour channels in image grids.
pub const IMAGE_CHANNELS: usize = 3;

/// `ℓ(M, τ) ⊗ ℓ(N, τ) ⊗ (1, 0, 0)` for `M x N x 3` images.
pub fn separable_kernel_3d(m: usize, n: usize, tau: usize) -> Result<SeparableKernel> {
    let min = m.min(n);
    if tau == 0 || min < 3 || 2 * tau > min - 1 {
        return Err(LcrError::InvalidTau { tau, len: min });
    }
    SeparableKernel::from_axes(vec![
        laplacian_values(m, tau)?,
        laplacian_values(n, tau)?,
        spatial_unit_kernel(IMAGE_CHANNELS),
    ])
}

/// Small dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(LcrError::ShapeMismatch(format!(
                "matrix has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        Ok(self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn frobenius_norm_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// `T x T` circulant matrix whose column `j` is `x` shifted down by `j`.
/// O(T²) memory.
pub fn circulant(x: &[f64]) -> DenseMatrix {
    convolution_matrix_unchecked(x, x.len())
}

/// First `tau` columns of `circulant(x)`. O(T·τ) memory.
pub fn convolution_matrix(x: &[f64], tau: usize) -> Result<DenseMatrix> {
    if tau == 0 || tau > x.len() {
        return Err(LcrError::InvalidTau { tau, len: x.len() });
    }
    Ok(convolution_matrix_unchecked(x, tau))
}

fn convolution_matrix_unchecked(x: &[f64], cols: usize) -> DenseMatrix {
    let t = x.len();
    let mut data = vec![0.0; t * cols];
    for r in 0..t {
        for c in 0..cols {
            data[r * cols + c] = x[(r + t - c) % t];
        }
    }
    DenseMatrix {
        rows: t,
        cols,
        data,
    }
}

/// `½‖k ⋆ x‖²`, evaluated in the frequency domain as `(1/2P)‖k̂ ∘ x̂‖²`.
pub fn temporal_regularizer<K: ConvolutionKernel + ?Sized>(x: &DataGrid, kernel: &K) -> Result<f64> {
    let kernel_hat = kernel.spectrum_for(x.shape())?;
    let x_hat = dft(x);
    let energy: f64 = x_hat
        .as_slice()
        .iter()
        .zip(kernel_hat.as_slice())
        .map(|(a, b)| (a * b).norm_sqr())
        .sum();
    Ok(energy / (2.0 * x.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::circular_convolve;
    use crate::spectral::oracle::{direct_circular_convolution, naive_dft};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
        DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(laplacian_kernel(5, 1).unwrap().values(), &[2.0, -1.0, 0.0, 0.0, -1.0]);
        assert_eq!(laplacian_kernel(5, 2).unwrap().values(), &[4.0, -1.0, -1.0, -1.0, -1.0]);
        assert!(matches!(laplacian_kernel(4, 2), Err(LcrError::InvalidTau { tau: 2, len: 4 })));
        assert!(laplacian_kernel(5, 0).is_err());
        assert!(laplacian_kernel(2, 1).is_err());
    }

    #[test]
    fn laplacian_invariants() {
        for t in 3..=24 {
            for tau in 1..=(t - 1) / 2 {
                let k = laplacian_kernel(t, tau).unwrap();
                assert_eq!(k.values().iter().sum::<f64>(), 0.0);
                assert_eq!(k.values().iter().filter(|&&v| v == -1.0).count(), 2 * tau);
                assert_eq!(k.spectrum().as_slice()[0], Complex64::new(0.0, 0.0));
                let naive = naive_dft(&k.grid().to_complex(), -1.0);
                for (a, b) in k.spectrum().as_slice().iter().zip(naive.as_slice()) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn spatial_unit_kernel_examples() {
        assert_eq!(spatial_unit_kernel(3), vec![1.0, 0.0, 0.0]);
        assert_eq!(spatial_unit_kernel(1), vec![1.0]);
        let x = DataGrid::from_series(vec![3.0, -1.0, 7.5]).unwrap();
        let e = DataGrid::from_series(spatial_unit_kernel(3)).unwrap();
        assert!(circular_convolve(&x, &e).unwrap().distance(&x) < 1e-12);
    }

    #[test]
    fn separable_2d_examples() {
        let k = separable_kernel_2d(1, 5, 1).unwrap();
        assert_eq!(k.full_grid().dims(), &[1, 5]);
        assert_eq!(k.full_grid().as_slice(), &[2.0, -1.0, 0.0, 0.0, -1.0]);

        let k = separable_kernel_2d(3, 5, 1).unwrap();
        assert_eq!(&k.full_grid().as_slice()[..5], &[2.0, -1.0, 0.0, 0.0, -1.0]);
        assert!(k.full_grid().as_slice()[5..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn separable_spectrum_matches_2d_naive_dft() {
        for (n, t, tau) in [(3, 5, 1), (4, 9, 2), (1, 7, 3), (6, 8, 1)] {
            let k = separable_kernel_2d(n, t, tau).unwrap();
            let naive = naive_dft(&k.full_grid().to_complex(), -1.0);
            for (a, b) in k.spectrum().as_slice().iter().zip(naive.as_slice()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn separable_3d_examples() {
        let k = separable_kernel_3d(5, 5, 1).unwrap();
        let g = k.full_grid();
        let l = [2.0, -1.0, 0.0, 0.0, -1.0];
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(*g.get(&[i, j, 0]), l[i] * l[j]);
                assert_eq!(*g.get(&[i, j, 1]), 0.0);
                assert_eq!(*g.get(&[i, j, 2]), 0.0);
            }
        }
        assert_eq!(*g.get(&[0, 0, 0]), 4.0);
        assert!(separable_kernel_3d(5, 3, 1).is_ok());
        assert!(matches!(separable_kernel_3d(5, 3, 2), Err(LcrError::InvalidTau { .. })));

        let naive = naive_dft(&g.to_complex(), -1.0);
        for (a, b) in k.spectrum().as_slice().iter().zip(naive.as_slice()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn circulant_examples() {
        let c = circulant(&[1.0, 2.0, 3.0]);
        let expected = [[1.0, 3.0, 2.0], [2.0, 1.0, 3.0], [3.0, 2.0, 1.0]];
        for (r, row) in expected.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                assert_eq!(c.get(r, col), v);
            }
        }

        // The first 5x5 Laplacian matrix of the circulant graph with degree 2.
        let l = circulant(laplacian_kernel(5, 1).unwrap().values());
        let printed = [
            [2.0, -1.0, 0.0, 0.0, -1.0],
            [-1.0, 2.0, -1.0, 0.0, 0.0],
            [0.0, -1.0, 2.0, -1.0, 0.0],
            [0.0, 0.0, -1.0, 2.0, -1.0],
            [-1.0, 0.0, 0.0, -1.0, 2.0],
        ];
        for (r, row) in printed.iter().enumerate() {
            for (col, &v) in row.iter().enumerate() {
                assert_eq!(l.get(r, col), v);
            }
        }
    }

    #[test]
    fn convolution_matrix_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(convolution_matrix(&x, 3).unwrap(), circulant(&x));
        let c1 = convolution_matrix(&x, 1).unwrap();
        assert_eq!(c1.as_slice(), &[1.0, 2.0, 3.0]);
        assert!(convolution_matrix(&x, 0).is_err());
        assert!(convolution_matrix(&x, 4).is_err());
    }

    #[test]
    fn regularizer_examples() {
        let k = laplacian_kernel(5, 1).unwrap();
        let constant = DataGrid::from_series(vec![3.0; 5]).unwrap();
        assert!(temporal_regularizer(&constant, &k).unwrap().abs() < 1e-12);

        // ℓ ⋆ e₁ = ℓ, so ½‖ℓ‖² = ½(4 + 1 + 1) = 3.
        let impulse = DataGrid::from_series(vec![1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let direct = direct_circular_convolution(&impulse, &k.grid());
        let direct_value = 0.5 * direct.as_slice().iter().map(|v| v * v).sum::<f64>();
        assert!((direct_value - 3.0).abs() < 1e-12);
        assert!((temporal_regularizer(&impulse, &k).unwrap() - 3.0).abs() < 1e-10);

        let bad = DataGrid::from_series(vec![1.0; 4]).unwrap();
        assert!(matches!(temporal_regularizer(&bad, &k), Err(LcrError::ShapeMismatch(_))));
    }

    #[test]
    fn regularizer_accepts_directed_kernels() {
        // Random-walk style kernel (1, 0, 0, 0, -1): ½Σ(x_t - x_{t-1})².
        let kernel = DataGrid::from_series(vec![1.0, 0.0, 0.0, 0.0, -1.0]).unwrap();
        let x = DataGrid::from_series(vec![1.0, 4.0, 2.0, 0.0, 5.0]).unwrap();
        let v = x.as_slice();
        let expected: f64 = (0..5).map(|t| (v[t] - v[(t + 1) % 5]).powi(2)).sum::<f64>() * 0.5;
        assert!((temporal_regularizer(&x, &kernel).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn laplacian_matrix_is_symmetric_psd_with_zero_row_sums() {
        for t in [3usize, 5, 8, 13, 32] {
            for tau in 1..=(t - 1) / 2 {
                let l = circulant(laplacian_kernel(t, tau).unwrap().values());
                let m = to_nalgebra(&l);
                assert_eq!(m, m.transpose());
                for r in 0..t {
                    assert_eq!(m.row(r).sum(), 0.0);
                }
                let eig = m.symmetric_eigen();
                assert!(eig.eigenvalues.iter().all(|&e| e > -1e-10), "t={t} tau={tau}");
            }
        }
    }

    #[test]
    fn separable_kernel_annihilates_constant_axes() {
        let k = separable_kernel_2d(4, 9, 2).unwrap();
        // Constant along time, arbitrary across series.
        let data = (0..4).flat_map(|n| std::iter::repeat(n as f64 * 1.5 - 2.0).take(9)).collect();
        let x = DataGrid::new(Shape::new(&[4, 9]).unwrap(), data).unwrap();
        assert!(temporal_regularizer(&x, &k).unwrap().abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn matrix_and_kernel_forms_agree(
            (t, tau, x) in (3usize..=32).prop_flat_map(|t| {
                (Just(t), 1..=(t - 1) / 2, prop::collection::vec(-10.0f64..10.0, t))
            })
        ) {
            let k = laplacian_kernel(t, tau).unwrap();
            let lx = circulant(k.values()).mul_vec(&x).unwrap();
            let matrix_form = 0.5 * lx.iter().map(|v| v * v).sum::<f64>();
            let grid = DataGrid::from_series(x.clone()).unwrap();
            let freq = temporal_regularizer(&grid, &k).unwrap();
            prop_assert!((matrix_form - freq).abs() <= 1e-10 * matrix_form.max(1.0));
        }

        #[test]
        fn circulant_product_is_circular_convolution(
            (x, y) in (1usize..=32).prop_flat_map(|t| {
                (prop::collection::vec(-5.0f64..5.0, t), prop::collection::vec(-5.0f64..5.0, t))
            })
        ) {
            let via_matrix = circulant(&x).mul_vec(&y).unwrap();
            let xs = DataGrid::from_series(x).unwrap();
            let ys = DataGrid::from_series(y).unwrap();
            let via_fft = circular_convolve(&ys, &xs).unwrap();
            for (a, b) in via_matrix.iter().zip(via_fft.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12 * 100.0);
            }
        }

        #[test]
        fn convolution_matrix_norm_identity(
            (x, tau) in (1usize..=32).prop_flat_map(|t| (prop::collection::vec(-5.0f64..5.0, t), 1..=t))
        ) {
            let norm_sq: f64 = x.iter().map(|v| v * v).sum();
            let c = convolution_matrix(&x, tau).unwrap();
            prop_assert!((norm_sq - c.frobenius_norm_squared() / tau as f64).abs() <= 1e-12 * norm_sq.max(1.0));
        }
    }
}
