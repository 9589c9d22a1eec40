use std::path::Path;

use lcr::experiment::{run_on_dataset, ExperimentSpec, Masking, MetricSpec, SolverSpec};
use lcr::io::load_dataset;
use lcr::masking::uniform_random_mask;
use lcr::metrics::{rmse, EvalScope, EvalSet};
use lcr::{solve, Preset};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn laplacian_presets_beat_circnnm_rmse_on_fixture() {
    let y = load_dataset(&fixture("speeds_50x288.csv"), None).unwrap().grid;
    for (rate, seed) in [(0.3, 21), (0.5, 22), (0.9, 23)] {
        let mask = uniform_random_mask(y.shape(), rate, seed).unwrap();
        let score = |p: Preset| {
            let r = solve(&y, &mask, &p.config(y.shape()).unwrap()).unwrap();
            rmse(&EvalSet::from_grids(&y, &r.reconstruction, &mask, EvalScope::Hidden).unwrap())
        };
        let circ = score(Preset::CircNnm);
        for p in [Preset::Lcr2d, Preset::LcrN, Preset::LcrVec] {
            let s = score(p);
            assert!(s < circ, "{} rmse {s} vs circnnm {circ} at {rate}", p.name());
        }
    }
}

#[test]
fn experiment_reports_repeat_exactly() {
    let dataset = load_dataset(&fixture("speeds_50x288.csv"), None).unwrap();
    let spec = ExperimentSpec {
        dataset: fixture("speeds_50x288.csv"),
        format: None,
        masking: Masking::Slice {
            row_rate: 0.1,
            col_rate: 0.2,
            seed: 9,
        },
        solver: SolverSpec {
            preset: Some(Preset::Lcr2d),
            ..SolverSpec::default()
        },
        metrics: MetricSpec::default(),
        output: None,
        output_format: None,
        report: None,
    };
    let a = run_on_dataset(&spec, &dataset, None).unwrap();
    let b = run_on_dataset(&spec, &dataset, None).unwrap();
    assert_eq!(a.report.without_timing().unwrap(), b.report.without_timing().unwrap());
    assert_eq!(a.reconstruction, b.reconstruction);
}
