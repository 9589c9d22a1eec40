use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lcr::error::{ErrorClass, LcrError};
use lcr::experiment::{run_experiment, ExperimentSpec, Masking, MetricSpec, SolverSpec};
use lcr::io::{load_dataset, Format};
use lcr::masking::{slice_mask, uniform_random_mask, ObservationMask};
use lcr::metrics::{mape, psnr_of, rmse, EvalScope, EvalSet};
use lcr::parallel::{configure_threads, Execution};
use lcr::selftest::run_selftest;
use lcr::{Preset, Shape, Variant};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_SELFTEST: u8 = 5;

#[derive(Parser)]
#[command(name = "lcr", version, about = "Laplacian convolutional representation imputation")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide entries of a dataset, reconstruct them, and report accuracy.
    Impute(ImputeArgs),
    /// Generate a missing-data mask and save it as CSV.
    Mask(MaskArgs),
    /// Compare a reconstruction against ground truth.
    Eval(EvalArgs),
    /// Check the transform and kernel identities against brute force.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Observation weight; `inf` holds observed entries exactly.
    #[arg(long, value_parser = parse_eta)]
    eta: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Record the objective after every iteration.
    #[arg(long)]
    record_objective: bool,
    #[arg(long, value_enum)]
    execution: Option<ExecutionArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ExecutionArg {
    Sequential,
    Parallel,
}

#[derive(Args)]
struct MaskingFlags {
    /// Fraction of entries (pixels for images) to hide at random.
    #[arg(long, conflicts_with_all = ["row_rate", "col_rate", "mask"])]
    missing_rate: Option<f64>,
    /// Fraction of whole rows to hide.
    #[arg(long, requires = "col_rate")]
    row_rate: Option<f64>,
    /// Fraction of whole columns to hide.
    #[arg(long, requires = "row_rate")]
    col_rate: Option<f64>,
    /// Mask CSV to intersect with the dataset's own missing entries.
    #[arg(long, conflicts_with_all = ["row_rate", "col_rate"])]
    mask: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ImputeArgs {
    /// Dataset file (CSV, LCRD binary, PPM or PNG).
    input: Option<PathBuf>,
    /// Experiment JSON; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    solver: SolverFlags,
    #[command(flatten)]
    masking: MaskingFlags,
    /// Reconstruction file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report file (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Entries used for MAPE and RMSE.
    #[arg(long, value_enum)]
    scope: Option<EvalScope>,
    /// Entries used for PSNR.
    #[arg(long, value_enum)]
    psnr_scope: Option<EvalScope>,
    #[arg(long)]
    peak: Option<f64>,
}

#[derive(Args)]
struct MaskArgs {
    /// Grid shape such as `50x288`.
    #[arg(long, conflicts_with = "input", value_parser = parse_shape)]
    shape: Option<Shape>,
    /// Take the shape from a dataset.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, conflicts_with_all = ["row_rate", "col_rate"])]
    missing_rate: Option<f64>,
    #[arg(long, requires = "col_rate")]
    row_rate: Option<f64>,
    #[arg(long, requires = "row_rate")]
    col_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    prediction: PathBuf,
    /// Mask the reconstruction was made from; hidden entries are evaluated.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_enum, default_value = "hidden")]
    scope: EvalScope,
    #[arg(long)]
    peak: Option<f64>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Also write the results as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_eta(s: &str) -> Result<f64, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(f64::INFINITY);
    }
    s.parse::<f64>().map_err(|e| e.to_string())
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    let dims = s
        .split(['x', 'X'])
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("{d:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Shape::new(&dims).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 || !configure_threads(n) {
            log::warn!("--threads {n} not applied");
        }
    }
    let result = match cli.command {
        Command::Impute(args) => impute(args),
        Command::Mask(args) => mask(args),
        Command::Eval(args) => eval(args),
        Command::Selftest(args) => selftest(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => EXIT_CONFIG,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numeric => EXIT_NUMERIC,
            })
        }
    }
}

fn impute(args: ImputeArgs) -> lcr::Result<ExitCode> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_json_file(path)?,
        None => {
            let dataset = args
                .input
                .clone()
                .ok_or_else(|| LcrError::InvalidConfig("an input file or --config is required".into()))?;
            ExperimentSpec {
                dataset,
                format: None,
                masking: Masking::FileMask { path: None },
                solver: SolverSpec::default(),
                metrics: MetricSpec::default(),
                output: None,
                output_format: None,
                report: None,
            }
        }
    };
    if let Some(input) = args.input {
        spec.dataset = input;
    }
    if args.format.is_some() {
        spec.format = args.format;
    }

    let m = &args.masking;
    if let Some(rate) = m.missing_rate {
        spec.masking = Masking::Uniform {
            missing_rate: rate,
            seed: m.seed,
        };
    } else if let (Some(row_rate), Some(col_rate)) = (m.row_rate, m.col_rate) {
        spec.masking = Masking::Slice {
            row_rate,
            col_rate,
            seed: m.seed,
        };
    } else if let Some(path) = &m.mask {
        spec.masking = Masking::FileMask { path: Some(path.clone()) };
    }

    let s = &args.solver;
    let solver = &mut spec.solver;
    solver.preset = s.preset.or(solver.preset);
    solver.variant = s.variant.or(solver.variant);
    solver.lambda = s.lambda.or(solver.lambda);
    solver.gamma = s.gamma.or(solver.gamma);
    solver.eta = s.eta.or(solver.eta);
    solver.tau = s.tau.or(solver.tau);
    solver.max_iter = s.max_iter.or(solver.max_iter);
    solver.tol = s.tol.or(solver.tol);
    solver.record_objective |= s.record_objective;
    match s.execution {
        Some(ExecutionArg::Sequential) => solver.execution = Execution::Sequential,
        Some(ExecutionArg::Parallel) => solver.execution = Execution::Parallel,
        None => {}
    }

    if let Some(scope) = args.scope {
        spec.metrics.scope = scope;
    }
    if let Some(scope) = args.psnr_scope {
        spec.metrics.psnr_scope = scope;
    }
    if args.peak.is_some() {
        spec.metrics.peak = args.peak;
    }
    if args.output.is_some() {
        spec.output = args.output;
    }
    if args.report.is_some() {
        spec.report = args.report;
    }

    let outcome = run_experiment(&spec)?;
    if spec.report.is_none() {
        println!("{}", outcome.report.to_json()?);
    }
    Ok(ExitCode::SUCCESS)
}

fn mask(args: MaskArgs) -> lcr::Result<ExitCode> {
    let shape = match (&args.shape, &args.input) {
        (Some(shape), _) => shape.clone(),
        (None, Some(path)) => load_dataset(path, args.format)?.grid.shape().clone(),
        (None, None) => return Err(LcrError::InvalidConfig("--shape or --input is required".into())),
    };
    let mask = match (args.missing_rate, args.row_rate, args.col_rate) {
        (Some(rate), _, _) => uniform_random_mask(&shape, rate, args.seed)?,
        (None, Some(r), Some(c)) => slice_mask(&shape, r, c, args.seed)?,
        _ => {
            return Err(LcrError::InvalidConfig(
                "--missing-rate or --row-rate with --col-rate is required".into(),
            ))
        }
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(&args.output)?);
    mask.write_csv(&mut out)?;
    out.flush()?;
    println!(
        "{{\"shape\":\"{}\",\"observed\":{},\"missing\":{},\"seed\":{}}}",
        shape,
        mask.observed_count(),
        mask.missing_count(),
        args.seed
    );
    Ok(ExitCode::SUCCESS)
}

fn eval(args: EvalArgs) -> lcr::Result<ExitCode> {
    let truth = load_dataset(&args.truth, args.format)?;
    let prediction = load_dataset(&args.prediction, args.format)?;
    truth.grid.ensure_same_shape(&prediction.grid, "eval")?;
    let shown = match &args.mask {
        Some(path) => ObservationMask::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))?,
        None => ObservationMask::empty(truth.grid.shape().clone()),
    };
    if shown.shape() != truth.grid.shape() {
        return Err(LcrError::ShapeMismatch(format!(
            "mask {} vs data {}",
            shown.shape(),
            truth.grid.shape()
        )));
    }
    let indices: Vec<usize> = (0..truth.grid.len())
        .filter(|&i| truth.mask.is_observed(i) && prediction.mask.is_observed(i))
        .filter(|&i| args.scope == EvalScope::All || !shown.is_observed(i))
        .collect();
    let set = EvalSet::new(
        indices.iter().map(|&i| truth.grid.as_slice()[i]).collect(),
        indices.iter().map(|&i| prediction.grid.as_slice()[i]).collect(),
    )?;
    let m = mape(&set).ok();
    let peak = args.peak.or(truth.meta.peak);
    let report = serde_json::json!({
        "evaluated": set.len(),
        "scope": args.scope,
        "mape": m.map(|m| m.value),
        "mape_excluded": m.map(|m| m.excluded),
        "rmse": rmse(&set),
        "psnr": peak.map(|p| psnr_of(&set, p)),
        "peak": peak,
    });
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn selftest(args: SelftestArgs) -> lcr::Result<ExitCode> {
    let report = run_selftest();
    for c in &report.checks {
        println!(
            "{} {} (max error {:.2e}, tolerance {:.0e}, {} cases)",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_error,
            c.tolerance,
            c.cases
        );
    }
    if let Some(path) = &args.output {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SELFTEST)
    })
}
