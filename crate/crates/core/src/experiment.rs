//! One imputation experiment: load, mask, solve, evaluate, report.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};
use crate::grid::{DataGrid, Shape};
use crate::io::{load_dataset, write_dataset, Dataset, Format, RASTER_PEAK};
use crate::masking::{slice_mask, uniform_random_mask, ObservationMask, MASK_GENERATOR};
use crate::metrics::{mape, psnr_of, rmse, EvalScope, EvalSet, Psnr};
use crate::parallel::Execution;
use crate::solver::config::eta_option_serde;
use crate::solver::{solve, Preset, SolveReport, SolverConfig, Variant};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// How entries are hidden before solving.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Masking {
    /// Missing markers in the dataset, optionally intersected with a mask
    /// file.
    FileMask {
        #[serde(default)]
        path: Option<PathBuf>,
    },
    /// Uniformly random entries (whole pixels for images).
    Uniform { missing_rate: f64, seed: u64 },
    /// Whole rows and whole columns.
    Slice { row_rate: f64, col_rate: f64, seed: u64 },
}

impl Masking {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Masking::FileMask { .. } => None,
            Masking::Uniform { seed, .. } | Masking::Slice { seed, .. } => Some(*seed),
        }
    }

    fn is_synthetic(&self) -> bool {
        !matches!(self, Masking::FileMask { .. })
    }

    /// Mask applied on top of the dataset's own observed set.
    pub fn build(&self, shape: &Shape) -> Result<ObservationMask> {
        match self {
            Masking::FileMask { path: None } => Ok(ObservationMask::full(shape.clone())),
            Masking::FileMask { path: Some(path) } => {
                let file = std::io::BufReader::new(std::fs::File::open(path)?);
                let mask = ObservationMask::read_csv(file)?;
                if mask.shape() != shape {
                    return Err(LcrError::ShapeMismatch(format!(
                        "mask file {} is {} but the dataset is {}",
                        path.display(),
                        mask.shape(),
                        shape
                    )));
                }
                Ok(mask)
            }
            Masking::Uniform { missing_rate, seed } => uniform_random_mask(shape, *missing_rate, *seed),
            Masking::Slice { row_rate, col_rate, seed } => slice_mask(shape, *row_rate, *col_rate, *seed),
        }
    }
}

/// Solver settings: a preset plus optional overrides. Without a preset the
/// variant's own preset is used; without either, the one matching the data
/// rank.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub preset: Option<Preset>,
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default, with = "eta_option_serde")]
    pub eta: Option<f64>,
    #[serde(default)]
    pub tau: Option<usize>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub record_objective: bool,
    #[serde(default)]
    pub execution: Execution,
}

impl SolverSpec {
    pub fn resolve(&self, shape: &Shape) -> Result<(Preset, SolverConfig)> {
        let preset = match (self.preset, self.variant) {
            (Some(p), _) => p,
            (None, Some(v)) => Preset::for_variant(v),
            (None, None) => match shape.rank() {
                1 => Preset::Lcr1d,
                2 => Preset::Lcr2d,
                _ => Preset::Lcr3d,
            },
        };
        let rule = preset.rule(shape)?;
        let mut config = rule.config_with_lambda(self.lambda.unwrap_or(rule.lambda));
        if let Some(v) = self.variant {
            config.variant = v;
        }
        if let Some(g) = self.gamma {
            config.gamma = g;
        }
        if let Some(e) = self.eta {
            config.eta = e;
        }
        if let Some(t) = self.tau {
            config.tau = t;
        }
        if let Some(m) = self.max_iter {
            config.max_iter = m;
        }
        if let Some(t) = self.tol {
            config.tol = t;
        }
        config.record_objective = self.record_objective;
        config.execution = self.execution;
        config.validate()?;
        Ok((preset, config))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    /// Entries used for MAPE and RMSE.
    #[serde(default)]
    pub scope: EvalScope,
    /// Entries used for PSNR.
    #[serde(default = "all_entries")]
    pub psnr_scope: EvalScope,
    /// PSNR peak. Defaults to the format's peak, or 255 for images.
    #[serde(default)]
    pub peak: Option<f64>,
}

fn all_entries() -> EvalScope {
    EvalScope::All
}

impl Default for MetricSpec {
    fn default() -> Self {
        MetricSpec {
            scope: EvalScope::Hidden,
            psnr_scope: EvalScope::All,
            peak: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    #[serde(default)]
    pub format: Option<Format>,
    pub masking: Masking,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub metrics: MetricSpec,
    /// Reconstruction file, written in the input format unless
    /// `output_format` says otherwise.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub output_format: Option<Format>,
    /// Report file.
    #[serde(default)]
    pub report: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json_file(path: &Path) -> Result<ExperimentSpec> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| LcrError::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
    pub shape: Shape,
    pub observed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskingSummary {
    pub directive: Masking,
    pub generator: &'static str,
    pub seed: Option<u64>,
    /// Entries the solver saw.
    pub observed: usize,
    /// Entries known in the dataset but hidden from the solver.
    pub hidden: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub converged: bool,
    pub degenerate_mask: bool,
    pub final_primal_residual: f64,
    pub last_rel_change: f64,
    pub imaginary_residue_max: f64,
    pub primal_residual_history: Vec<f64>,
    pub objective_trace: Option<Vec<f64>>,
}

impl From<&SolveReport> for SolveSummary {
    fn from(r: &SolveReport) -> Self {
        SolveSummary {
            iterations: r.iterations_run,
            converged: r.converged,
            degenerate_mask: r.degenerate_mask,
            final_primal_residual: r.final_primal_residual,
            last_rel_change: finite_or_max(r.last_rel_change),
            imaginary_residue_max: r.imaginary_residue_max,
            primal_residual_history: r.primal_residual_history.clone(),
            objective_trace: r.objective_trace.clone(),
        }
    }
}

/// JSON has no infinity.
fn finite_or_max(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::MAX
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub scope: EvalScope,
    pub evaluated: usize,
    pub mape: Option<f64>,
    pub mape_excluded: usize,
    pub rmse: f64,
    pub psnr: Option<Psnr>,
    pub psnr_scope: EvalScope,
    pub peak: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timing {
    pub ingest_ms: f64,
    pub mask_ms: f64,
    pub solve_ms: f64,
    pub evaluate_ms: f64,
    pub write_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub dataset: DatasetSummary,
    pub preset: Preset,
    pub config: SolverConfig,
    pub masking: MaskingSummary,
    pub solve: SolveSummary,
    /// Absent when nothing known was hidden from the solver.
    pub metrics: Option<MetricsSummary>,
    pub reconstruction_path: Option<PathBuf>,
    pub timing: Timing,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON value with the `timing` object removed, for comparisons across
    /// runs.
    pub fn without_timing(&self) -> Result<serde_json::Value> {
        let mut value = serde_json::to_value(self)?;
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        Ok(value)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub reconstruction: DataGrid,
    /// The mask the solver saw.
    pub mask: ObservationMask,
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Loads the dataset named by `spec`, runs it, and writes the configured
/// output files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Outcome> {
    let start = Instant::now();
    let dataset = load_dataset(&spec.dataset, spec.format)?;
    let ingest_ms = ms_since(start);
    let format = match spec.format {
        Some(f) => Some(f),
        None => Format::from_path(&spec.dataset).ok(),
    };
    let mut outcome = run_on_dataset(spec, &dataset, format)?;
    outcome.report.timing.ingest_ms = ingest_ms;
    Ok(outcome)
}

/// Runs `spec` against an already loaded dataset. `spec.dataset` is only
/// echoed.
pub fn run_on_dataset(spec: &ExperimentSpec, dataset: &Dataset, format: Option<Format>) -> Result<Outcome> {
    let shape = dataset.grid.shape().clone();
    let (preset, config) = spec.solver.resolve(&shape)?;

    let t = Instant::now();
    let extra = spec.masking.build(&shape)?;
    let solver_mask = dataset.mask.intersect(&extra)?;
    let hidden = dataset.mask.observed_count() - solver_mask.observed_count();
    let mask_ms = ms_since(t);

    let t = Instant::now();
    let observed_only = crate::masking::project(&dataset.grid, &solver_mask)?;
    let report = solve(&observed_only, &solver_mask, &config)?;
    let solve_ms = ms_since(t);

    let t = Instant::now();
    let metrics = if hidden == 0 {
        if spec.masking.is_synthetic() {
            return Err(LcrError::EmptyEvaluationSet);
        }
        None
    } else {
        Some(evaluate(dataset, &solver_mask, &report.reconstruction, &spec.metrics)?)
    };
    let evaluate_ms = ms_since(t);

    let t = Instant::now();
    let output_format = spec.output_format.or(format);
    if let Some(path) = &spec.output {
        let out = Dataset::new(report.reconstruction.clone(), ObservationMask::full(shape.clone()))?;
        write_dataset(path, &out, output_format)?;
    }
    let write_ms = ms_since(t);

    let report_doc = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
        },
        dataset: DatasetSummary {
            path: Some(spec.dataset.clone()),
            format,
            shape: shape.clone(),
            observed: dataset.mask.observed_count(),
        },
        preset,
        config,
        masking: MaskingSummary {
            directive: spec.masking.clone(),
            generator: MASK_GENERATOR,
            seed: spec.masking.seed(),
            observed: solver_mask.observed_count(),
            hidden,
        },
        solve: SolveSummary::from(&report),
        metrics,
        reconstruction_path: spec.output.clone(),
        timing: Timing {
            ingest_ms: 0.0,
            mask_ms,
            solve_ms,
            evaluate_ms,
            write_ms,
        },
    };
    if let Some(path) = &spec.report {
        std::fs::write(path, report_doc.to_json()?)?;
    }
    Ok(Outcome {
        report: report_doc,
        reconstruction: report.reconstruction,
        mask: solver_mask,
    })
}

/// Metrics against the dataset's known values. "Hidden" means known in the
/// dataset but not shown to the solver.
fn evaluate(
    dataset: &Dataset,
    solver_mask: &ObservationMask,
    reconstruction: &DataGrid,
    spec: &MetricSpec,
) -> Result<MetricsSummary> {
    let select = |scope: EvalScope| -> Result<EvalSet> {
        let indices: Vec<usize> = (0..dataset.grid.len())
            .filter(|&i| dataset.mask.is_observed(i))
            .filter(|&i| scope == EvalScope::All || !solver_mask.is_observed(i))
            .collect();
        EvalSet::new(
            indices.iter().map(|&i| dataset.grid.as_slice()[i]).collect(),
            indices.iter().map(|&i| reconstruction.as_slice()[i]).collect(),
        )
    };
    let set = select(spec.scope)?;
    let (mape_value, mape_excluded) = match mape(&set) {
        Ok(m) => (Some(m.value), m.excluded),
        Err(LcrError::AllActualsZero) => {
            log::warn!("every evaluated actual is zero; MAPE omitted");
            (None, set.len())
        }
        Err(e) => return Err(e),
    };
    let peak = spec.peak.or(dataset.meta.peak).or_else(|| (dataset.grid.rank() == 3).then_some(RASTER_PEAK));
    if let Some(p) = peak {
        if !(p.is_finite() && p > 0.0) {
            return Err(LcrError::InvalidConfig(format!("peak must be positive, got {p}")));
        }
    }
    let psnr = match peak {
        Some(p) => Some(psnr_of(&select(spec.psnr_scope)?, p)),
        None => None,
    };
    Ok(MetricsSummary {
        scope: spec.scope,
        evaluated: set.len(),
        mape: mape_value,
        mape_excluded,
        rmse: rmse(&set),
        psnr,
        psnr_scope: spec.psnr_scope,
        peak,
    })
}
