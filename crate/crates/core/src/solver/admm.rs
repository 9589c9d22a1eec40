use num_complex::Complex64;

use super::config::{SolverConfig, Variant};
use super::ops::{shrink_in_place, w_update_into, z_update_into};
use crate::error::{LcrError, Result};
use crate::grid::{DataGrid, Shape};
use crate::kernels::{laplacian_kernel, laplacian_values, spatial_unit_kernel, SeparableKernel};
use crate::masking::{project, ObservationMask};
use crate::parallel::{map_indexed, Execution};
use crate::spectral::{split_real, FftPlan};

/// Iterates of one ADMM run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: DataGrid,
    pub z: DataGrid,
    pub w: DataGrid,
    pub iteration: usize,
    pub primal_residual_history: Vec<f64>,
    pub last_rel_change: f64,
}

impl SolverState {
    /// `x₀ = P_Ω(y)`, `z₀ = x₀`, `w₀ = 0`.
    pub fn initialize(y: &DataGrid, mask: &ObservationMask) -> Result<Self> {
        let x = project(y, mask)?;
        Ok(SolverState {
            z: x.clone(),
            w: DataGrid::zeros(y.shape().clone()),
            x,
            iteration: 0,
            primal_residual_history: Vec::new(),
            last_rel_change: f64::INFINITY,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub reconstruction: DataGrid,
    pub iterations_run: usize,
    pub converged: bool,
    pub final_primal_residual: f64,
    pub last_rel_change: f64,
    pub primal_residual_history: Vec<f64>,
    /// Objective after each iteration, when requested.
    pub objective_trace: Option<Vec<f64>>,
    pub imaginary_residue_max: f64,
    /// Set when some part of the input had no observed entry and was
    /// returned as zeros without iterating.
    pub degenerate_mask: bool,
}

/// Runs the variant selected by `config` on `y` observed at `mask`.
pub fn solve(y: &DataGrid, mask: &ObservationMask, config: &SolverConfig) -> Result<SolveReport> {
    config.validate()?;
    if y.shape() != mask.shape() {
        return Err(LcrError::ShapeMismatch(format!(
            "data {} vs mask {}",
            y.shape(),
            mask.shape()
        )));
    }
    if let Some(i) = y.first_non_finite() {
        return Err(LcrError::NonFiniteInput(i));
    }
    if let Some(expected) = config.variant.expected_rank() {
        if y.rank() != expected {
            return Err(LcrError::ConfigRankMismatch {
                variant: config.variant.name(),
                expected,
                actual: y.rank(),
            });
        }
    }

    match config.variant {
        Variant::Lcr1d | Variant::Lcr2d | Variant::Lcr3d => {
            let power = kernel_power(config.variant, y.shape(), config.tau)?;
            run(y, mask, &power, config, config.execution)
        }
        Variant::LcrVec => solve_flattened(y, mask, config, true),
        Variant::CircNnm if y.rank() == 2 => solve_flattened(y, mask, config, false),
        Variant::CircNnm => {
            let power = vec![0.0; y.len()];
            run(y, mask, &power, config, config.execution)
        }
        Variant::LcrN => solve_rows(y, mask, config),
    }
}

/// `|ℓ̂|²` of the variant's kernel on `shape`.
fn kernel_power(variant: Variant, shape: &Shape, tau: usize) -> Result<Vec<f64>> {
    let dims = shape.dims();
    let spectrum = match variant {
        Variant::Lcr1d | Variant::LcrVec => laplacian_kernel(dims[0], tau)?.spectrum().clone(),
        Variant::Lcr2d => SeparableKernel::from_axes(vec![
            spatial_unit_kernel(dims[0]),
            laplacian_values(dims[1], tau)?,
        ])?
        .spectrum()
        .clone(),
        Variant::Lcr3d => {
            let min = dims[0].min(dims[1]);
            if tau == 0 || min < 3 || 2 * tau > min - 1 {
                return Err(LcrError::InvalidTau { tau, len: min });
            }
            SeparableKernel::from_axes(vec![
                laplacian_values(dims[0], tau)?,
                laplacian_values(dims[1], tau)?,
                spatial_unit_kernel(dims[2]),
            ])?
            .spectrum()
            .clone()
        }
        Variant::LcrN | Variant::CircNnm => unreachable!("no single kernel for {variant}"),
    };
    Ok(spectrum.as_slice().iter().map(|v| v.norm_sqr()).collect())
}

/// Vectorized form: series are concatenated end to end.
fn solve_flattened(
    y: &DataGrid,
    mask: &ObservationMask,
    config: &SolverConfig,
    regularized: bool,
) -> Result<SolveReport> {
    let flat = Shape::new(&[y.len()])?;
    let y_flat = y.clone().reshaped(flat.clone())?;
    let mask_flat = mask.reshaped(flat.clone())?;
    let power = if regularized {
        kernel_power(Variant::LcrVec, &flat, config.tau)?
    } else {
        vec![0.0; y.len()]
    };
    let mut report = run(&y_flat, &mask_flat, &power, config, config.execution)?;
    report.reconstruction = report.reconstruction.reshaped(y.shape().clone())?;
    Ok(report)
}

/// Independent rank-1 solves, one per row, sharing `config`.
fn solve_rows(y: &DataGrid, mask: &ObservationMask, config: &SolverConfig) -> Result<SolveReport> {
    let (n, t) = (y.dims()[0], y.dims()[1]);
    let series = Shape::new(&[t])?;
    let power = kernel_power(Variant::Lcr1d, &series, config.tau)?;
    let reports: Vec<SolveReport> = map_indexed(config.execution, n, |row| {
        let range = row * t..(row + 1) * t;
        let y_row = DataGrid::from_series(y.as_slice()[range.clone()].to_vec())?;
        let mask_row = ObservationMask::from_vec(series.clone(), mask.as_slice()[range].to_vec())?;
        run(&y_row, &mask_row, &power, config, Execution::Sequential)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    combine_rows(y.shape(), reports)
}

/// Stacks per-row reports. Residuals combine in quadrature; rows that
/// stopped early contribute their final value to later iterations.
fn combine_rows(shape: &Shape, reports: Vec<SolveReport>) -> Result<SolveReport> {
    let iterations_run = reports.iter().map(|r| r.iterations_run).max().unwrap_or(0);
    let sampled = |series: &[f64], i: usize| series.get(i).or(series.last()).copied().unwrap_or(0.0);
    let primal_residual_history: Vec<f64> = (0..iterations_run)
        .map(|i| {
            reports
                .iter()
                .map(|r| sampled(&r.primal_residual_history, i).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let objective_trace = if reports.iter().all(|r| r.objective_trace.is_some()) {
        Some(
            (0..iterations_run)
                .map(|i| {
                    reports
                        .iter()
                        .map(|r| sampled(r.objective_trace.as_deref().unwrap_or(&[]), i))
                        .sum()
                })
                .collect(),
        )
    } else {
        None
    };
    let final_primal_residual = reports
        .iter()
        .map(|r| r.final_primal_residual.powi(2))
        .sum::<f64>()
        .sqrt();
    let mut data = Vec::with_capacity(shape.len());
    for r in &reports {
        data.extend_from_slice(r.reconstruction.as_slice());
    }
    Ok(SolveReport {
        reconstruction: DataGrid::new(shape.clone(), data)?,
        iterations_run,
        converged: reports.iter().all(|r| r.converged),
        final_primal_residual,
        last_rel_change: reports.iter().map(|r| r.last_rel_change).fold(0.0, f64::max),
        primal_residual_history,
        objective_trace,
        imaginary_residue_max: reports.iter().map(|r| r.imaginary_residue_max).fold(0.0, f64::max),
        degenerate_mask: reports.iter().any(|r| r.degenerate_mask),
    })
}

/// The ADMM loop on one grid with a fixed kernel power spectrum.
fn run(
    y: &DataGrid,
    mask: &ObservationMask,
    power: &[f64],
    config: &SolverConfig,
    exec: Execution,
) -> Result<SolveReport> {
    if mask.observed_count() == 0 {
        log::warn!("no observed entries in a {} block; returning zeros", y.shape());
        return Ok(SolveReport {
            reconstruction: DataGrid::zeros(y.shape().clone()),
            iterations_run: 0,
            converged: false,
            final_primal_residual: 0.0,
            last_rel_change: f64::INFINITY,
            primal_residual_history: Vec::new(),
            objective_trace: config.record_objective.then(Vec::new),
            imaginary_residue_max: 0.0,
            degenerate_mask: true,
        });
    }

    let lambda = config.lambda;
    let gamma = config.effective_gamma();
    let p = y.len();
    let threshold = p as f64 / lambda;
    let denominator: Vec<f64> = power.iter().map(|&k| gamma * k + lambda).collect();
    let plan = FftPlan::new(y.shape()).with_execution(exec);

    let mut state = SolverState::initialize(y, mask)?;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); p];
    let mut next_x = vec![0.0; p];
    let mut objective_trace = config.record_objective.then(Vec::new);
    let mut imaginary_residue_max = 0.0_f64;
    let mut converged = false;

    while state.iteration < config.max_iter {
        // F(λz − w) = λẑ − ŵ, so one transform serves both.
        for ((s, &z), &w) in spectrum.iter_mut().zip(state.z.as_slice()).zip(state.w.as_slice()) {
            *s = Complex64::new(lambda * z - w, 0.0);
        }
        plan.forward_in_place(&mut spectrum);
        for (s, &d) in spectrum.iter_mut().zip(&denominator) {
            *s /= d;
        }
        shrink_in_place(&mut spectrum, threshold);

        if let Some(trace) = objective_trace.as_mut() {
            let nuclear: f64 = spectrum.iter().map(|v| v.norm()).sum();
            let regularizer = if gamma == 0.0 {
                0.0
            } else {
                spectrum
                    .iter()
                    .zip(power)
                    .map(|(v, &k)| k * v.norm_sqr())
                    .sum::<f64>()
                    / (2.0 * p as f64)
            };
            trace.push(nuclear + gamma * regularizer);
        }

        plan.inverse_in_place(&mut spectrum);
        let residue = split_real(&spectrum, &mut next_x)?;
        imaginary_residue_max = imaginary_residue_max.max(residue);

        let x = state.x.as_mut_slice();
        let old_norm = norm(x);
        let change = x.iter().zip(&next_x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let rel_change = if old_norm > 0.0 {
            change / old_norm
        } else if change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        x.copy_from_slice(&next_x);

        z_update_into(
            state.z.as_mut_slice(),
            state.x.as_slice(),
            state.w.as_slice(),
            y.as_slice(),
            mask.as_slice(),
            lambda,
            config.eta,
        );
        w_update_into(state.w.as_mut_slice(), state.x.as_slice(), state.z.as_slice(), lambda);

        let residual = state.x.distance(&state.z);
        state.primal_residual_history.push(residual);
        state.last_rel_change = rel_change;
        state.iteration += 1;

        if rel_change <= config.tol && residual <= config.tol * state.x.frobenius_norm() {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        final_primal_residual: state.primal_residual_history.last().copied().unwrap_or(0.0),
        reconstruction: state.x,
        iterations_run: state.iteration,
        converged,
        last_rel_change: state.last_rel_change,
        primal_residual_history: state.primal_residual_history,
        objective_trace,
        imaginary_residue_max,
        degenerate_mask: false,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::laplacian_kernel;
    use crate::masking::uniform_random_mask;
    use crate::solver::config::Preset;
    use crate::solver::ops::objective;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn unit(rng: &mut ChaCha8Rng) -> f64 {
        rng.next_u64() as f64 / u64::MAX as f64
    }

    fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
        let u1 = unit(rng).max(1e-300);
        let u2 = unit(rng);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn harmonic_series(t: usize, noise: f64, seed: u64) -> DataGrid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let two_pi = 2.0 * std::f64::consts::PI;
        DataGrid::from_series(
            (0..t)
                .map(|i| {
                    let s = i as f64;
                    (two_pi * s / 24.0).sin() + 0.5 * (two_pi * s / 48.0).cos() + noise * gaussian(&mut rng)
                })
                .collect(),
        )
        .unwrap()
    }

    fn profile_matrix(n: usize, t: usize) -> DataGrid {
        let two_pi = 2.0 * std::f64::consts::PI;
        let data = (0..n)
            .flat_map(|r| {
                (0..t).map(move |c| {
                    3.0 + (two_pi * c as f64 / 32.0 + r as f64 * 0.4).sin() + 0.3 * (r as f64 * 0.7).cos()
                })
            })
            .collect();
        DataGrid::new(Shape::new(&[n, t]).unwrap(), data).unwrap()
    }

    fn rmse_hidden(truth: &DataGrid, rec: &DataGrid, mask: &ObservationMask) -> f64 {
        let hidden = mask.missing_indices();
        let sum: f64 = hidden
            .iter()
            .map(|&i| (truth.as_slice()[i] - rec.as_slice()[i]).powi(2))
            .sum();
        (sum / hidden.len() as f64).sqrt()
    }

    #[test]
    fn constant_series_is_a_fixed_point_under_exact_constraint() {
        let y = DataGrid::from_series(vec![2.5; 48]).unwrap();
        let mask = ObservationMask::full(y.shape().clone());
        for gamma in [0.0, 1.0] {
            let config = SolverConfig::new(Variant::Lcr1d, 0.7)
                .with_gamma(gamma)
                .with_eta(f64::INFINITY);
            let report = solve(&y, &mask, &config).unwrap();
            for v in report.reconstruction.as_slice() {
                assert!((v - 2.5).abs() < 1e-6, "{v}");
            }
        }
        let m = DataGrid::new(Shape::new(&[4, 12]).unwrap(), vec![-1.25; 48]).unwrap();
        let mask = ObservationMask::full(m.shape().clone());
        for variant in [Variant::Lcr2d, Variant::LcrN, Variant::LcrVec, Variant::CircNnm] {
            let config = SolverConfig::new(variant, 0.4).with_gamma(0.8).with_eta(f64::INFINITY);
            let report = solve(&m, &mask, &config).unwrap();
            for v in report.reconstruction.as_slice() {
                assert!((v + 1.25).abs() < 1e-6, "{variant}: {v}");
            }
        }
    }

    #[test]
    fn regularizer_beats_nuclear_norm_alone_on_sparse_harmonics() {
        let t = 288;
        let y = harmonic_series(t, 0.1, 3);
        let mask = uniform_random_mask(y.shape(), 0.95, 11).unwrap();
        let lambda = 5e-3 * t as f64;
        let base = SolverConfig::new(Variant::Lcr1d, lambda)
            .with_eta(1e3 * lambda)
            .with_max_iter(3000)
            .with_tol(1e-6);
        let lcr = solve(&y, &mask, &base.clone().with_gamma(2.0 * lambda)).unwrap();
        let plain = solve(&y, &mask, &base.with_gamma(0.0)).unwrap();
        assert!(rmse_hidden(&y, &lcr.reconstruction, &mask) < rmse_hidden(&y, &plain.reconstruction, &mask));
    }

    #[test]
    fn single_row_matrix_matches_series() {
        let y = harmonic_series(60, 0.05, 5);
        let mask = uniform_random_mask(y.shape(), 0.6, 2).unwrap();
        let config = SolverConfig::new(Variant::Lcr1d, 0.5).with_gamma(1.0).with_max_iter(60);
        let one = solve(&y, &mask, &config).unwrap();
        let shape = Shape::new(&[1, 60]).unwrap();
        let y2 = y.clone().reshaped(shape.clone()).unwrap();
        let mask2 = mask.reshaped(shape).unwrap();
        let two = solve(&y2, &mask2, &config.clone().with_variant(Variant::Lcr2d)).unwrap();
        assert_eq!(one.iterations_run, two.iterations_run);
        for (a, b) in one.reconstruction.as_slice().iter().zip(two.reconstruction.as_slice()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn circnnm_is_gamma_zero_bit_for_bit() {
        let y = harmonic_series(96, 0.1, 9);
        let mask = uniform_random_mask(y.shape(), 0.7, 4).unwrap();
        let c = SolverConfig::new(Variant::CircNnm, 0.3).with_gamma(5.0).with_max_iter(40);
        let a = solve(&y, &mask, &c).unwrap();
        let b = solve(&y, &mask, &c.clone().with_variant(Variant::Lcr1d).with_gamma(0.0)).unwrap();
        assert_eq!(a, b);

        let m = profile_matrix(6, 40);
        let mask = uniform_random_mask(m.shape(), 0.5, 4).unwrap();
        let a = solve(&m, &mask, &c).unwrap();
        let b = solve(&m, &mask, &c.clone().with_variant(Variant::LcrVec).with_gamma(0.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn objective_improves_on_masked_start() {
        let y = harmonic_series(16, 0.0, 1);
        let mask = uniform_random_mask(y.shape(), 0.5, 7).unwrap();
        let kernel = laplacian_kernel(16, 2).unwrap();
        let config = SolverConfig::new(Variant::Lcr1d, 1.0)
            .with_gamma(2.0)
            .with_eta(f64::INFINITY)
            .with_max_iter(500)
            .with_tol(1e-8);
        let report = solve(&y, &mask, &config).unwrap();
        let start = objective(&project(&y, &mask).unwrap(), &kernel, 2.0).unwrap();
        let end = objective(&report.reconstruction, &kernel, 2.0).unwrap();
        assert!(end <= start, "{end} > {start}");
    }

    #[test]
    fn objective_trace_matches_direct_evaluation() {
        let y = harmonic_series(32, 0.05, 4);
        let mask = uniform_random_mask(y.shape(), 0.5, 1).unwrap();
        let kernel = laplacian_kernel(32, 2).unwrap();
        let config = SolverConfig::new(Variant::Lcr1d, 1.0)
            .with_gamma(1.5)
            .with_max_iter(7)
            .with_objective_trace(true);
        let report = solve(&y, &mask, &config).unwrap();
        let trace = report.objective_trace.unwrap();
        assert_eq!(trace.len(), report.iterations_run);
        let direct = objective(&report.reconstruction, &kernel, 1.5).unwrap();
        assert!((trace.last().unwrap() - direct).abs() <= 1e-9 * direct);
    }

    #[test]
    fn shifting_data_and_mask_shifts_the_reconstruction() {
        let t = 64;
        let y = harmonic_series(t, 0.1, 8);
        let mask = uniform_random_mask(y.shape(), 0.7, 3).unwrap();
        let config = SolverConfig::new(Variant::Lcr1d, 0.32).with_gamma(0.64).with_max_iter(80);
        let base = solve(&y, &mask, &config).unwrap();
        for shift in [1usize, 17, 40] {
            let roll = |v: &[f64]| (0..t).map(|i| v[(i + t - shift) % t]).collect::<Vec<_>>();
            let ys = DataGrid::from_series(roll(y.as_slice())).unwrap();
            let ms: Vec<bool> = (0..t).map(|i| mask.as_slice()[(i + t - shift) % t]).collect();
            let ms = ObservationMask::from_vec(y.shape().clone(), ms).unwrap();
            let shifted = solve(&ys, &ms, &config).unwrap();
            let expected = roll(base.reconstruction.as_slice());
            for (a, b) in shifted.reconstruction.as_slice().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let m = profile_matrix(8, 48);
        let mask = uniform_random_mask(m.shape(), 0.6, 10).unwrap();
        for variant in [Variant::Lcr2d, Variant::LcrN, Variant::LcrVec] {
            let config = Preset::for_variant(variant).config(m.shape()).unwrap();
            let a = solve(&m, &mask, &config).unwrap();
            let b = solve(&m, &mask, &config).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn execution_policy_does_not_change_results() {
        let m = profile_matrix(12, 40);
        let mask = uniform_random_mask(m.shape(), 0.5, 6).unwrap();
        for variant in [Variant::Lcr2d, Variant::LcrN] {
            let config = Preset::for_variant(variant).config(m.shape()).unwrap();
            let par = solve(&m, &mask, &config.clone().with_execution(Execution::Parallel)).unwrap();
            let seq = solve(&m, &mask, &config.with_execution(Execution::Sequential)).unwrap();
            assert_eq!(par, seq);
        }
    }

    #[test]
    fn observed_entries_are_kept_with_large_eta() {
        let y = harmonic_series(120, 0.0, 2);
        let mask = uniform_random_mask(y.shape(), 0.6, 5).unwrap();
        // The misfit at the fixed point scales like 1/η, so it needs λ on
        // the order of T rather than the univariate preset.
        let lambda = 120.0;
        let config = SolverConfig::new(Variant::Lcr1d, lambda)
            .with_gamma(2.0 * lambda)
            .with_eta(1e3 * lambda)
            .with_max_iter(400)
            .with_tol(1e-6);
        let report = solve(&y, &mask, &config).unwrap();
        let diff = project(&report.reconstruction, &mask).unwrap().distance(&project(&y, &mask).unwrap());
        let scale = project(&y, &mask).unwrap().frobenius_norm();
        assert!(diff / scale <= 1e-2, "{}", diff / scale);
    }

    #[test]
    fn report_is_real_and_consistent() {
        let m = profile_matrix(10, 64);
        let mask = uniform_random_mask(m.shape(), 0.7, 8).unwrap();
        for variant in [Variant::Lcr2d, Variant::LcrN, Variant::LcrVec, Variant::CircNnm] {
            let config = Preset::for_variant(variant)
                .config(m.shape())
                .unwrap()
                .with_max_iter(300);
            let r = solve(&m, &mask, &config).unwrap();
            assert!(r.imaginary_residue_max <= 1e-9 * r.reconstruction.max_abs(), "{variant}");
            assert_eq!(r.primal_residual_history.len(), r.iterations_run);
            if r.converged {
                assert!(r.last_rel_change <= config.tol);
                assert!(r.final_primal_residual <= config.tol * r.reconstruction.frobenius_norm() * 2.0);
            }
        }
    }

    #[test]
    fn image_variant_runs() {
        let shape = Shape::new(&[12, 10, 3]).unwrap();
        let data = (0..shape.len())
            .map(|i| {
                let idx = shape.unravel(i);
                100.0 + 10.0 * idx[0] as f64 - 4.0 * idx[1] as f64 + 20.0 * idx[2] as f64
            })
            .collect();
        let img = DataGrid::new(shape.clone(), data).unwrap();
        let mask = uniform_random_mask(&shape, 0.5, 1).unwrap();
        let config = SolverConfig::new(Variant::Lcr3d, 1.0).with_gamma(1.0).with_max_iter(50);
        let r = solve(&img, &mask, &config).unwrap();
        assert_eq!(r.reconstruction.shape(), &shape);
        assert!(r.reconstruction.as_slice().iter().all(|v| v.is_finite()));
        let bad = SolverConfig::new(Variant::Lcr3d, 1.0).with_tau(5);
        assert!(matches!(solve(&img, &mask, &bad), Err(LcrError::InvalidTau { .. })));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let y = DataGrid::from_series(vec![1.0; 10]).unwrap();
        let mask = ObservationMask::full(y.shape().clone());
        let c = SolverConfig::new(Variant::Lcr2d, 1.0);
        assert!(matches!(
            solve(&y, &mask, &c),
            Err(LcrError::ConfigRankMismatch { expected: 2, actual: 1, .. })
        ));
        let other = ObservationMask::full(Shape::new(&[11]).unwrap());
        assert!(solve(&y, &other, &SolverConfig::new(Variant::Lcr1d, 1.0)).is_err());
        assert!(solve(&y, &mask, &SolverConfig::new(Variant::Lcr1d, -1.0)).is_err());

        let mut raw = DataGrid::zeros(y.shape().clone());
        raw.as_mut_slice()[3] = f64::NAN;
        assert!(matches!(
            solve(&raw, &mask, &SolverConfig::new(Variant::Lcr1d, 1.0)),
            Err(LcrError::NonFiniteInput(3))
        ));
    }

    #[test]
    fn fully_missing_input_returns_zeros_with_warning() {
        let y = DataGrid::from_series(vec![4.0; 12]).unwrap();
        let mask = ObservationMask::empty(y.shape().clone());
        let r = solve(&y, &mask, &SolverConfig::new(Variant::Lcr1d, 1.0)).unwrap();
        assert!(r.degenerate_mask);
        assert_eq!(r.iterations_run, 0);
        assert!(r.reconstruction.as_slice().iter().all(|&v| v == 0.0));

        let m = profile_matrix(3, 12);
        let mut observed = vec![true; 36];
        observed[12..24].iter_mut().for_each(|o| *o = false);
        let mask = ObservationMask::from_vec(m.shape().clone(), observed).unwrap();
        let r = solve(&m, &mask, &SolverConfig::new(Variant::LcrN, 1.0)).unwrap();
        assert!(r.degenerate_mask);
        assert!(r.reconstruction.as_slice()[12..24].iter().all(|&v| v == 0.0));
    }
}
