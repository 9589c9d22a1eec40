//! Regenerates the files in `fixtures/`.
//!
//! cargo run --example make_fixtures

use std::f64::consts::PI;
use std::path::Path;

use lcr::io::{write_dataset, Dataset};
use lcr::{DataGrid, ObservationMask, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Daily speed-like profiles: a base level, one sinusoid per day with a
/// random phase, a congestion dip whose timing depends on the phase, and
/// unit noise.
fn speed_profiles(n: usize, t: usize, seed: u64) -> DataGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(0.0..2.0 * PI),
                rng.random_range(5.0..15.0),
                rng.random_range(55.0..65.0),
            )
        })
        .collect();
    let mut data = Vec::with_capacity(n * t);
    for &(phase, amp, base) in &params {
        let dip_at = 100.0 + 20.0 * phase.sin();
        for i in 0..t {
            let s = i as f64;
            let noise: f64 = rng.sample(StandardNormal);
            data.push(
                base + amp * (2.0 * PI * s / t as f64 + phase).sin() - 8.0 * (-(s - dip_at).powi(2) / 200.0).exp()
                    + noise,
            );
        }
    }
    DataGrid::new(Shape::new(&[n, t]).unwrap(), data).unwrap()
}

fn two_harmonics(t: usize, sigma: f64, seed: u64) -> DataGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..t)
        .map(|i| {
            let s = i as f64;
            let noise: f64 = rng.sample(StandardNormal);
            (2.0 * PI * s / 48.0).sin() + 0.5 * (2.0 * PI * s / 96.0).sin() + sigma * noise
        })
        .collect();
    DataGrid::from_series(data).unwrap()
}

/// Non-periodic smooth colour image: ramps, Gaussian blobs and sinusoids
/// whose periods do not divide the image size.
fn smooth_image(m: usize, n: usize) -> DataGrid {
    let shape = Shape::new(&[m, n, 3]).unwrap();
    let blob = |r: f64, c: f64, r0: f64, c0: f64, w: f64| (-((r - r0).powi(2) + (c - c0).powi(2)) / w).exp();
    let data = (0..shape.len())
        .map(|flat| {
            let idx = shape.unravel(flat);
            let r = idx[0] as f64 / m as f64;
            let c = idx[1] as f64 / n as f64;
            let v = match idx[2] {
                0 => 0.2 + 0.5 * r + 0.2 * (2.0 * PI * 1.3 * c + 0.4).sin() + 0.3 * blob(r, c, 0.3, 0.6, 0.02),
                1 => 0.3 + 0.4 * c * r + 0.25 * (2.0 * PI * 0.7 * (r + c)).cos(),
                _ => 0.6 - 0.3 * r + 0.3 * blob(r, c, 0.7, 0.3, 0.05),
            };
            (255.0 * v.clamp(0.0, 1.0)).round()
        })
        .collect();
    DataGrid::new(shape, data).unwrap()
}

fn rounded(grid: DataGrid, digits: i32) -> DataGrid {
    let scale = 10f64.powi(digits);
    grid.map(|v| (v * scale).round() / scale)
}

fn save(dir: &Path, name: &str, grid: DataGrid) {
    let mask = ObservationMask::full(grid.shape().clone());
    let dataset = Dataset::new(grid, mask).unwrap();
    write_dataset(&dir.join(name), &dataset, None).unwrap();
    println!("wrote {name}");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    save(&dir, "speeds_50x288.csv", rounded(speed_profiles(50, 288, 7), 4));
    save(&dir, "series_288.csv", rounded(two_harmonics(288, 0.1, 7), 6));
    save(&dir, "smooth_64x64.png", smooth_image(64, 64));
}
