use std::path::Path;

use lcr::io::{load_dataset, write_dataset, Dataset, Format};
use lcr::masking::{project, uniform_random_mask};
use lcr::{DataGrid, ObservationMask, Shape};

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn sample(shape: &[usize]) -> DataGrid {
    let shape = Shape::new(shape).unwrap();
    let data = (0..shape.len()).map(|i| ((i * 37) % 101) as f64 * 0.25 - 3.0).collect();
    DataGrid::new(shape, data).unwrap()
}

#[test]
fn csv_round_trip_keeps_missing_entries() {
    let dir = tempfile::tempdir().unwrap();
    for dims in [&[17][..], &[4, 9][..]] {
        let grid = sample(dims);
        let mask = uniform_random_mask(grid.shape(), 0.3, 5).unwrap();
        let ds = Dataset::new(project(&grid, &mask).unwrap(), mask).unwrap();
        let path = dir.path().join("d.csv");
        write_dataset(&path, &ds, None).unwrap();
        let back = load_dataset(&path, None).unwrap();
        assert_eq!(back.grid, ds.grid);
        assert_eq!(back.mask, ds.mask);
    }
}

#[test]
fn binary_round_trip_is_bit_exact_for_every_rank() {
    let dir = tempfile::tempdir().unwrap();
    for dims in [&[33][..], &[5, 7][..], &[3, 4, 2][..]] {
        let grid = sample(dims).map(|v| v / 3.0);
        let mask = uniform_random_mask(grid.shape(), 0.4, 6).unwrap();
        let ds = Dataset::new(project(&grid, &mask).unwrap(), mask).unwrap();
        let path = dir.path().join("d.lcrd");
        write_dataset(&path, &ds, Some(Format::Binary)).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"LCRD");
        assert_eq!(bytes.len(), 16 + 8 * ds.grid.len());
        let back = load_dataset(&path, Some(Format::Binary)).unwrap();
        assert_eq!(back.mask, ds.mask);
        for (a, b) in back.grid.as_slice().iter().zip(ds.grid.as_slice()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}

#[test]
fn png_fixture_survives_png_and_ppm_round_trips() {
    let img = load_dataset(&fixture("smooth_64x64.png"), None).unwrap();
    assert_eq!(img.grid.shape().dims(), &[64, 64, 3]);
    assert_eq!(img.meta.peak, Some(255.0));
    assert!(img.fully_observed());
    let dir = tempfile::tempdir().unwrap();
    for name in ["copy.png", "copy.ppm"] {
        let path = dir.path().join(name);
        write_dataset(&path, &img, None).unwrap();
        let back = load_dataset(&path, None).unwrap();
        assert_eq!(back.grid, img.grid, "{name}");
    }
}

#[test]
fn raster_output_is_rounded_and_clamped() {
    let shape = Shape::new(&[2, 2, 3]).unwrap();
    let grid = DataGrid::new(shape.clone(), vec![-4.0, 0.4, 0.6, 254.6, 300.0, 10.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let ds = Dataset::new(grid, ObservationMask::full(shape)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.png");
    write_dataset(&path, &ds, None).unwrap();
    let back = load_dataset(&path, None).unwrap();
    assert_eq!(&back.grid.as_slice()[..6], &[0.0, 0.0, 1.0, 255.0, 255.0, 11.0]);
}

#[test]
fn fixture_matrix_has_expected_shape_and_scale() {
    let ds = load_dataset(&fixture("speeds_50x288.csv"), None).unwrap();
    assert_eq!(ds.grid.shape().dims(), &[50, 288]);
    assert!(ds.fully_observed());
    let mean = ds.grid.as_slice().iter().sum::<f64>() / ds.grid.len() as f64;
    assert!((40.0..80.0).contains(&mean), "{mean}");
}
