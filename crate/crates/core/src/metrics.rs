//! Imputation accuracy: MAPE and RMSE over evaluated entries, PSNR over
//! whole grids.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};
use crate::grid::DataGrid;
use crate::masking::ObservationMask;

/// Actuals at or below this magnitude are left out of MAPE.
pub const MAPE_ZERO_CUTOFF: f64 = 1e-9;

/// Which entries a metric is computed over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvalScope {
    /// Only entries hidden by the mask.
    #[default]
    Hidden,
    /// Every entry.
    All,
}

/// Paired ground truth and predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    actual: Vec<f64>,
    predicted: Vec<f64>,
}

impl EvalSet {
    pub fn new(actual: Vec<f64>, predicted: Vec<f64>) -> Result<Self> {
        if actual.len() != predicted.len() {
            return Err(LcrError::ShapeMismatch(format!(
                "{} actual values vs {} predictions",
                actual.len(),
                predicted.len()
            )));
        }
        if actual.is_empty() {
            return Err(LcrError::EmptyEvaluationSet);
        }
        Ok(EvalSet { actual, predicted })
    }

    /// Gathers the entries of `truth` and `reconstruction` selected by
    /// `scope`, in flat order.
    pub fn from_grids(
        truth: &DataGrid,
        reconstruction: &DataGrid,
        mask: &ObservationMask,
        scope: EvalScope,
    ) -> Result<Self> {
        truth.ensure_same_shape(reconstruction, "evaluation")?;
        if truth.shape() != mask.shape() {
            return Err(LcrError::ShapeMismatch(format!(
                "evaluation grid {} vs mask {}",
                truth.shape(),
                mask.shape()
            )));
        }
        let pick = |i: usize| scope == EvalScope::All || !mask.is_observed(i);
        let indices: Vec<usize> = (0..truth.len()).filter(|&i| pick(i)).collect();
        EvalSet::new(
            indices.iter().map(|&i| truth.as_slice()[i]).collect(),
            indices.iter().map(|&i| reconstruction.as_slice()[i]).collect(),
        )
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actual.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mape {
    /// Percentage.
    pub value: f64,
    /// Entries skipped because their actual value was (near) zero.
    pub excluded: usize,
}

/// Mean of `|y − ŷ|/|y|`, in percent.
pub fn mape(e: &EvalSet) -> Result<Mape> {
    let mut sum = 0.0;
    let mut used = 0usize;
    for (&y, &p) in e.actual.iter().zip(&e.predicted) {
        if y.abs() > MAPE_ZERO_CUTOFF {
            sum += ((y - p) / y).abs();
            used += 1;
        }
    }
    if used == 0 {
        return Err(LcrError::AllActualsZero);
    }
    Ok(Mape {
        value: 100.0 * sum / used as f64,
        excluded: e.len() - used,
    })
}

pub fn rmse(e: &EvalSet) -> f64 {
    let sum: f64 = e.actual.iter().zip(&e.predicted).map(|(y, p)| (y - p).powi(2)).sum();
    (sum / e.len() as f64).sqrt()
}

/// Peak signal-to-noise ratio. Identical grids have no finite value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Psnr {
    Decibels(f64),
    Identical,
}

impl Psnr {
    /// Decibels, with `Identical` mapped to positive infinity.
    pub fn value(self) -> f64 {
        match self {
            Psnr::Decibels(db) => db,
            Psnr::Identical => f64::INFINITY,
        }
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Decibels(db) => write!(f, "{db:.2} dB"),
            Psnr::Identical => f.write_str("identical"),
        }
    }
}

impl Serialize for Psnr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Psnr::Decibels(db) => s.serialize_f64(*db),
            Psnr::Identical => s.serialize_str("identical"),
        }
    }
}

/// `10·log₁₀(peak²/MSE)` over every entry.
pub fn psnr(reference: &DataGrid, reconstruction: &DataGrid, peak: f64) -> Result<Psnr> {
    reference.ensure_same_shape(reconstruction, "psnr")?;
    if !(peak.is_finite() && peak > 0.0) {
        return Err(LcrError::InvalidConfig(format!("peak must be positive, got {peak}")));
    }
    let set = EvalSet::new(reference.as_slice().to_vec(), reconstruction.as_slice().to_vec())?;
    Ok(psnr_of(&set, peak))
}

/// PSNR over the entries of an evaluation set.
pub fn psnr_of(e: &EvalSet, peak: f64) -> Psnr {
    let mse = rmse(e).powi(2);
    if mse == 0.0 {
        Psnr::Identical
    } else {
        Psnr::Decibels(10.0 * (peak * peak / mse).log10())
    }
}
