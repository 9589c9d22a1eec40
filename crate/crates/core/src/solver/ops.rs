//! Closed-form ADMM sub-steps and the objective pieces they minimise.

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{ComplexGrid, DataGrid, Grid};
use crate::kernels::{temporal_regularizer, ConvolutionKernel};
use crate::masking::ObservationMask;
use crate::spectral::dft;

/// Frequency-domain x-subproblem point:
/// `ĥ = (λẑ − ŵ) ⊘ (γ|ℓ̂|² + λ)`.
///
/// The denominator uses the squared modulus of the kernel spectrum, so it is
/// real and bounded below by `λ` for any real kernel.
pub fn h_update(
    z_hat: &ComplexGrid,
    w_hat: &ComplexGrid,
    ell_hat: &ComplexGrid,
    lambda: f64,
    gamma: f64,
) -> Result<ComplexGrid> {
    z_hat.ensure_same_shape(w_hat, "h_update z/w")?;
    z_hat.ensure_same_shape(ell_hat, "h_update z/kernel")?;
    let data = z_hat
        .as_slice()
        .iter()
        .zip(w_hat.as_slice())
        .zip(ell_hat.as_slice())
        .map(|((z, w), l)| (z * lambda - w) / (gamma * l.norm_sqr() + lambda))
        .collect();
    Grid::from_vec(z_hat.shape().clone(), data)
}

/// Proximal operator of `θ‖·‖₁` on complex entries: shrinks each modulus by
/// `θ` (floored at zero) and keeps the phase.
pub fn complex_soft_threshold(h_hat: &ComplexGrid, threshold: f64) -> ComplexGrid {
    let mut out = h_hat.clone();
    shrink_in_place(out.as_mut_slice(), threshold);
    out
}

pub(crate) fn shrink_in_place(values: &mut [Complex64], threshold: f64) {
    for v in values {
        let modulus = v.norm();
        if modulus <= threshold || modulus == 0.0 {
            *v = Complex64::new(0.0, 0.0);
        } else {
            *v *= 1.0 - threshold / modulus;
        }
    }
}

/// Observation-consistent auxiliary update. Observed entries blend the
/// current estimate with the data,
/// `(λx + w + ηy)/(λ + η)`; missing entries take `x + w/λ`. An infinite
/// `eta` pins observed entries to `y` exactly.
pub fn z_update(
    x: &DataGrid,
    w: &DataGrid,
    y: &DataGrid,
    mask: &ObservationMask,
    lambda: f64,
    eta: f64,
) -> Result<DataGrid> {
    x.ensure_same_shape(w, "z_update x/w")?;
    x.ensure_same_shape(y, "z_update x/y")?;
    if x.shape() != mask.shape() {
        return Err(crate::error::LcrError::ShapeMismatch(format!(
            "z_update grid {} vs mask {}",
            x.shape(),
            mask.shape()
        )));
    }
    let mut z = x.clone();
    z_update_into(
        z.as_mut_slice(),
        x.as_slice(),
        w.as_slice(),
        y.as_slice(),
        mask.as_slice(),
        lambda,
        eta,
    );
    Ok(z)
}

pub(crate) fn z_update_into(
    z: &mut [f64],
    x: &[f64],
    w: &[f64],
    y: &[f64],
    observed: &[bool],
    lambda: f64,
    eta: f64,
) {
    let exact = eta.is_infinite();
    for i in 0..z.len() {
        z[i] = if !observed[i] {
            x[i] + w[i] / lambda
        } else if exact {
            y[i]
        } else {
            (lambda * x[i] + w[i] + eta * y[i]) / (lambda + eta)
        };
    }
}

/// Dual ascent `w + λ(x − z)`.
pub fn w_update(w: &DataGrid, x: &DataGrid, z: &DataGrid, lambda: f64) -> Result<DataGrid> {
    w.ensure_same_shape(x, "w_update w/x")?;
    w.ensure_same_shape(z, "w_update w/z")?;
    let mut out = w.clone();
    w_update_into(out.as_mut_slice(), x.as_slice(), z.as_slice(), lambda);
    Ok(out)
}

pub(crate) fn w_update_into(w: &mut [f64], x: &[f64], z: &[f64], lambda: f64) {
    for i in 0..w.len() {
        w[i] += lambda * (x[i] - z[i]);
    }
}

/// Nuclear norm of the circulant operator built from `x`, which equals the
/// ℓ1 norm of its spectrum.
pub fn circulant_nuclear_norm(x: &DataGrid) -> f64 {
    dft(x).l1_norm()
}

/// `‖C(x)‖_* + γ·½‖k ⋆ x‖²`.
pub fn objective<K: ConvolutionKernel + ?Sized>(x: &DataGrid, kernel: &K, gamma: f64) -> Result<f64> {
    let regularizer = if gamma == 0.0 {
        // Still validates the kernel shape.
        kernel.spectrum_for(x.shape())?;
        0.0
    } else {
        temporal_regularizer(x, kernel)?
    };
    Ok(circulant_nuclear_norm(x) + gamma * regularizer)
}
