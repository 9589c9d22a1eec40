//! Dataset files: CSV, a raw little-endian binary layout, and 8-bit raster
//! images.
//!
//! Binary layout: the magic `LCRD`, three `u32` axis lengths (unused
//! trailing axes are 0), then the grid as `f64` values in row-major order.
//! NaN marks a missing entry in CSV and binary files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};
use crate::grid::{DataGrid, Grid, Shape, MAX_RANK};
use crate::masking::ObservationMask;

pub const BINARY_MAGIC: &[u8; 4] = b"LCRD";
pub const BINARY_HEADER_LEN: usize = 16;
/// Peak value of 8-bit raster data.
pub const RASTER_PEAK: f64 = 255.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Binary,
    Ppm,
    Png,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Binary => "binary",
            Format::Ppm => "ppm",
            Format::Png => "png",
        }
    }

    pub fn from_path(path: &Path) -> Result<Format> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "csv" | "txt" => Ok(Format::Csv),
            "bin" | "lcrd" => Ok(Format::Binary),
            "ppm" | "pnm" => Ok(Format::Ppm),
            "png" => Ok(Format::Png),
            _ => Err(LcrError::UnsupportedFormat(format!(
                "cannot infer a format from {}",
                path.display()
            ))),
        }
    }

    pub fn is_raster(self) -> bool {
        matches!(self, Format::Ppm | Format::Png)
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Binary => "bin",
            Format::Ppm => "ppm",
            Format::Png => "png",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DatasetMeta {
    pub source: Option<PathBuf>,
    pub shape: Shape,
    /// Largest representable value of the source format, when it has one.
    pub peak: Option<f64>,
    pub labels: Option<Vec<String>>,
}

/// A grid with its observed set. Missing entries hold 0 in `grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub grid: DataGrid,
    pub mask: ObservationMask,
    pub meta: DatasetMeta,
}

impl Dataset {
    /// Builds a dataset from values where non-finite entries are missing.
    pub fn from_raw(shape: Shape, raw: Vec<f64>) -> Result<Dataset> {
        let raw = Grid::from_vec(shape.clone(), raw)?;
        let mask = ObservationMask::from_finite(&raw);
        let values = raw.as_slice().iter().map(|v| if v.is_finite() { *v } else { 0.0 }).collect();
        Ok(Dataset {
            grid: DataGrid::new(shape.clone(), values)?,
            mask,
            meta: DatasetMeta {
                source: None,
                shape,
                peak: None,
                labels: None,
            },
        })
    }

    pub fn new(grid: DataGrid, mask: ObservationMask) -> Result<Dataset> {
        if grid.shape() != mask.shape() {
            return Err(LcrError::ShapeMismatch(format!(
                "dataset grid {} vs mask {}",
                grid.shape(),
                mask.shape()
            )));
        }
        let shape = grid.shape().clone();
        Ok(Dataset {
            grid,
            mask,
            meta: DatasetMeta {
                source: None,
                shape,
                peak: None,
                labels: None,
            },
        })
    }

    pub fn fully_observed(&self) -> bool {
        self.mask.missing_count() == 0
    }

    /// Values with NaN at missing entries.
    pub fn raw_values(&self) -> Vec<f64> {
        self.grid
            .as_slice()
            .iter()
            .zip(self.mask.as_slice())
            .map(|(&v, &o)| if o { v } else { f64::NAN })
            .collect()
    }
}

pub fn load_dataset(path: &Path, format: Option<Format>) -> Result<Dataset> {
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    let mut dataset = match format {
        Format::Csv => read_csv(BufReader::new(File::open(path)?))?,
        Format::Binary => read_binary(BufReader::new(File::open(path)?))?,
        Format::Ppm | Format::Png => read_raster(path, format)?,
    };
    dataset.meta.source = Some(path.to_path_buf());
    Ok(dataset)
}

pub fn write_dataset(path: &Path, dataset: &Dataset, format: Option<Format>) -> Result<()> {
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    match format {
        Format::Csv => {
            let mut out = BufWriter::new(File::create(path)?);
            write_csv(&mut out, dataset)?;
            out.flush()?;
        }
        Format::Binary => {
            let mut out = BufWriter::new(File::create(path)?);
            write_binary(&mut out, dataset)?;
            out.flush()?;
        }
        Format::Ppm | Format::Png => write_raster(path, &dataset.grid, format)?,
    }
    Ok(())
}

fn is_missing_token(cell: &str) -> bool {
    cell.is_empty() || cell.eq_ignore_ascii_case("nan") || cell.eq_ignore_ascii_case("na")
}

/// One column gives a series; otherwise rows are series and columns are
/// time steps. Lines starting with `#` and blank lines are skipped.
pub fn read_csv<R: BufRead>(input: R) -> Result<Dataset> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut first_line = 0usize;
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut row = Vec::new();
        for (col, cell) in trimmed.split(',').enumerate() {
            let cell = cell.trim();
            if is_missing_token(cell) {
                row.push(f64::NAN);
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| LcrError::Parse {
                location: format!("line {lineno}, column {}", col + 1),
                message: format!("not a number: {cell:?}"),
            })?;
            if !value.is_finite() {
                return Err(LcrError::Parse {
                    location: format!("line {lineno}, column {}", col + 1),
                    message: format!("infinite value {cell:?}"),
                });
            }
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(LcrError::Shape(format!(
                    "line {lineno} has {} columns but line {first_line} has {}",
                    row.len(),
                    first.len()
                )));
            }
        } else {
            first_line = lineno;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(LcrError::Parse {
            location: "end of input".into(),
            message: "no data rows".into(),
        });
    }
    let cols = rows[0].len();
    let shape = if cols == 1 {
        Shape::new(&[rows.len()])?
    } else {
        Shape::new(&[rows.len(), cols])?
    };
    Dataset::from_raw(shape, rows.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(out: &mut W, dataset: &Dataset) -> Result<()> {
    let shape = dataset.grid.shape();
    let cols = match shape.rank() {
        1 => 1,
        2 => shape.dims()[1],
        r => {
            return Err(LcrError::UnsupportedFormat(format!(
                "CSV holds rank 1 or 2 grids, got rank {r}"
            )))
        }
    };
    let raw = dataset.raw_values();
    for row in raw.chunks(cols) {
        let cells: Vec<String> = row
            .iter()
            .map(|v| if v.is_nan() { "NaN".to_string() } else { format!("{v}") })
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Dataset> {
    let mut header = [0u8; BINARY_HEADER_LEN];
    input.read_exact(&mut header).map_err(|_| LcrError::Parse {
        location: "offset 0".into(),
        message: "truncated header".into(),
    })?;
    if &header[..4] != BINARY_MAGIC {
        return Err(LcrError::Parse {
            location: "offset 0".into(),
            message: "missing LCRD magic".into(),
        });
    }
    let axes: Vec<usize> = (0..MAX_RANK)
        .map(|i| {
            let at = 4 + 4 * i;
            u32::from_le_bytes(header[at..at + 4].try_into().expect("4 bytes")) as usize
        })
        .collect();
    let rank = axes.iter().take_while(|&&n| n > 0).count();
    if rank == 0 || axes[rank..].iter().any(|&n| n > 0) {
        return Err(LcrError::Parse {
            location: "offset 4".into(),
            message: format!("invalid axis lengths {axes:?}"),
        });
    }
    let shape = Shape::new(&axes[..rank])?;
    let mut payload = Vec::new();
    input.read_to_end(&mut payload)?;
    let expected = shape.len() * 8;
    if payload.len() != expected {
        return Err(LcrError::Parse {
            location: format!("offset {}", BINARY_HEADER_LEN + payload.len().min(expected)),
            message: format!("payload is {} bytes, expected {expected}", payload.len()),
        });
    }
    let raw: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    if let Some(i) = raw.iter().position(|v| v.is_infinite()) {
        return Err(LcrError::Parse {
            location: format!("offset {}", BINARY_HEADER_LEN + 8 * i),
            message: "infinite value".into(),
        });
    }
    Dataset::from_raw(shape, raw)
}

pub fn write_binary<W: Write>(out: &mut W, dataset: &Dataset) -> Result<()> {
    out.write_all(BINARY_MAGIC)?;
    let dims = dataset.grid.dims();
    for i in 0..MAX_RANK {
        let n = dims.get(i).copied().unwrap_or(0);
        let n = u32::try_from(n).map_err(|_| LcrError::UnsupportedFormat(format!("axis length {n} exceeds u32")))?;
        out.write_all(&n.to_le_bytes())?;
    }
    for v in dataset.raw_values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Height × width × 3 grid on the 0–255 scale.
fn read_raster(path: &Path, format: Format) -> Result<Dataset> {
    let reader = image::ImageReader::open(path)?.with_guessed_format()?;
    let img = reader.decode()?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let shape = Shape::new(&[h, w, 3])?;
    let data = img.into_raw().into_iter().map(f64::from).collect();
    let mut dataset = Dataset::new(DataGrid::new(shape.clone(), data)?, ObservationMask::full(shape))?;
    dataset.meta.peak = Some(RASTER_PEAK);
    log::debug!("read {} raster {}", format.name(), path.display());
    Ok(dataset)
}

fn write_raster(path: &Path, grid: &DataGrid, format: Format) -> Result<()> {
    let dims = grid.dims();
    if grid.rank() != 3 || dims[2] != 3 {
        return Err(LcrError::UnsupportedFormat(format!(
            "raster output needs a height x width x 3 grid, got {}",
            grid.shape()
        )));
    }
    let too_big = |n: usize| u32::try_from(n).map_err(|_| LcrError::UnsupportedFormat("image too large".into()));
    let (h, w) = (too_big(dims[0])?, too_big(dims[1])?);
    let bytes = grid.as_slice().iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    let img = image::RgbImage::from_raw(w, h, bytes).expect("buffer matches dimensions");
    let target = match format {
        Format::Png => image::ImageFormat::Png,
        _ => image::ImageFormat::Pnm,
    };
    img.save_with_format(path, target)?;
    Ok(())
}
