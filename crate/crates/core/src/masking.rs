//! Observed index sets, the two orthogonal projections, and reproducible
//! missing-data patterns.
//!
//! Mask generation is fixed so that experiments replay bit-for-bit on any
//! platform: a ChaCha8 stream seeded with `seed_from_u64(seed)` drives a
//! partial Fisher-Yates shuffle, with bounded integers drawn by rejection
//! sampling on raw `u64` outputs. See [`MASK_GENERATOR`].

use std::io::{BufRead, Write};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{LcrError, Result};
use crate::grid::{DataGrid, Grid, Shape};

/// Identifier recorded in reports for the mask sampling algorithm.
pub const MASK_GENERATOR: &str = "chacha8-partial-fisher-yates-v1";

#[derive(Clone, Debug, PartialEq)]
pub struct ObservationMask {
    observed: Grid<bool>,
    observed_count: usize,
}

impl ObservationMask {
    pub fn new(observed: Grid<bool>) -> Self {
        let observed_count = observed.as_slice().iter().filter(|&&b| b).count();
        ObservationMask {
            observed,
            observed_count,
        }
    }

    pub fn from_vec(shape: Shape, observed: Vec<bool>) -> Result<Self> {
        Ok(ObservationMask::new(Grid::from_vec(shape, observed)?))
    }

    pub fn full(shape: Shape) -> Self {
        ObservationMask::new(Grid::filled(shape, true))
    }

    pub fn empty(shape: Shape) -> Self {
        ObservationMask::new(Grid::filled(shape, false))
    }

    /// Observed wherever `grid` holds a finite value.
    pub fn from_finite(grid: &Grid<f64>) -> Self {
        ObservationMask::new(grid.map(|v| v.is_finite()))
    }

    pub fn shape(&self) -> &Shape {
        self.observed.shape()
    }

    pub fn observed_count(&self) -> usize {
        self.observed_count
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.observed_count
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        self.observed.as_slice()
    }

    pub fn is_observed(&self, flat: usize) -> bool {
        self.observed.as_slice()[flat]
    }

    /// Entries observed in both masks.
    pub fn intersect(&self, other: &ObservationMask) -> Result<ObservationMask> {
        self.observed.ensure_same_shape(&other.observed, "mask intersection")?;
        let data = self
            .as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(&a, &b)| a && b)
            .collect();
        ObservationMask::from_vec(self.shape().clone(), data)
    }

    /// Same mask under a reshaped view with equal element count.
    pub fn reshaped(&self, shape: Shape) -> Result<ObservationMask> {
        Ok(ObservationMask::new(self.observed.clone().reshaped(shape)?))
    }

    /// Flat indices of entries outside the observed set.
    pub fn missing_indices(&self) -> Vec<usize> {
        self.as_slice()
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (!b).then_some(i))
            .collect()
    }

    /// Flat 0/1 CSV: a `# shape=AxB` header, then one value per line in
    /// row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# shape={}", self.shape())?;
        for &b in self.as_slice() {
            writeln!(out, "{}", u8::from(b))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<ObservationMask> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| LcrError::Parse {
            location: "line 1".into(),
            message: "empty mask file".into(),
        })?;
        let header = header?;
        let dims = header
            .trim()
            .strip_prefix("# shape=")
            .ok_or_else(|| LcrError::Parse {
                location: "line 1".into(),
                message: format!("expected '# shape=...', found '{header}'"),
            })?
            .split('x')
            .map(|d| d.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| LcrError::Parse {
                location: "line 1".into(),
                message: e.to_string(),
            })?;
        let shape = Shape::new(&dims)?;
        let mut observed = Vec::with_capacity(shape.len());
        for (i, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            observed.push(match line {
                "1" => true,
                "0" => false,
                other => {
                    return Err(LcrError::Parse {
                        location: format!("line {}", i + 1),
                        message: format!("expected 0 or 1, found '{other}'"),
                    })
                }
            });
        }
        if observed.len() != shape.len() {
            return Err(LcrError::Shape(format!(
                "mask header declares {} entries, file holds {}",
                shape.len(),
                observed.len()
            )));
        }
        ObservationMask::from_vec(shape, observed)
    }
}

fn check_shapes(y: &DataGrid, mask: &ObservationMask) -> Result<()> {
    if y.shape() != mask.shape() {
        return Err(LcrError::ShapeMismatch(format!(
            "grid {} vs mask {}",
            y.shape(),
            mask.shape()
        )));
    }
    Ok(())
}

/// Keeps observed entries and zeroes the rest.
pub fn project(y: &DataGrid, mask: &ObservationMask) -> Result<DataGrid> {
    check_shapes(y, mask)?;
    Ok(select(y, mask, true))
}

/// Keeps missing entries and zeroes the observed ones.
pub fn project_complement(y: &DataGrid, mask: &ObservationMask) -> Result<DataGrid> {
    check_shapes(y, mask)?;
    Ok(select(y, mask, false))
}

fn select(y: &DataGrid, mask: &ObservationMask, keep_observed: bool) -> DataGrid {
    let data = y
        .as_slice()
        .iter()
        .zip(mask.as_slice())
        .map(|(&v, &obs)| if obs == keep_observed { v } else { 0.0 })
        .collect();
    Grid::from_vec(y.shape().clone(), data).expect("same shape")
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rate) {
        return Err(LcrError::InvalidRate(rate));
    }
    Ok(())
}

/// Uniform integer in `0..bound` by rejection sampling.
fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let v = rng.next_u64();
        if v < zone {
            return v % bound;
        }
    }
}

/// First `count` entries of a seeded partial Fisher-Yates shuffle of `0..n`.
fn sample_without_replacement(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = i + uniform_below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

fn rounded_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64).round() as usize).min(n)
}

/// Hides `round(rate·P)` entries chosen uniformly without replacement.
///
/// For rank-3 (image) shapes the unit is the pixel: `round(rate·M·N)`
/// pixels are hidden across all channels at once.
pub fn uniform_random_mask(shape: &Shape, missing_rate: f64, seed: u64) -> Result<ObservationMask> {
    check_rate(missing_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (units, per_unit) = match shape.dims() {
        [m, n, c] => (m * n, *c),
        _ => (shape.len(), 1),
    };
    let hidden = sample_without_replacement(&mut rng, units, rounded_count(missing_rate, units));
    let mut observed = vec![true; shape.len()];
    for unit in hidden {
        observed[unit * per_unit..(unit + 1) * per_unit].fill(false);
    }
    ObservationMask::from_vec(shape.clone(), observed)
}

/// Hides whole rows (axis 0) and whole columns (axis 1), across every
/// channel. Rows are drawn first, then columns, from one seeded stream.
pub fn slice_mask(shape: &Shape, row_rate: f64, col_rate: f64, seed: u64) -> Result<ObservationMask> {
    check_rate(row_rate)?;
    check_rate(col_rate)?;
    let dims = shape.dims();
    if dims.len() < 2 {
        return Err(LcrError::InvalidShape(format!(
            "slice masks need a rank-2 or rank-3 shape, got {shape}"
        )));
    }
    let (rows, cols) = (dims[0], dims[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden_rows = sample_without_replacement(&mut rng, rows, rounded_count(row_rate, rows));
    let hidden_cols = sample_without_replacement(&mut rng, cols, rounded_count(col_rate, cols));
    let mut row_hidden = vec![false; rows];
    hidden_rows.into_iter().for_each(|r| row_hidden[r] = true);
    let mut col_hidden = vec![false; cols];
    hidden_cols.into_iter().for_each(|c| col_hidden[c] = true);

    let observed = (0..shape.len())
        .map(|flat| {
            let index = shape.unravel(flat);
            !(row_hidden[index[0]] || col_hidden[index[1]])
        })
        .collect();
    ObservationMask::from_vec(shape.clone(), observed)
}
