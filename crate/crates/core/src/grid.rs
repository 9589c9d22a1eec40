//! Dense row-major grids of rank 1 to 3.
//!
//! A rank-1 grid is a time series of length `T`, a rank-2 grid is a
//! `series x time` matrix, and a rank-3 grid is a `rows x cols x channels`
//! image. The last axis is contiguous in memory.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LcrError, Result};

pub const MAX_RANK: usize = 3;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Vec<usize>);

impl Shape {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() || dims.len() > MAX_RANK {
            return Err(LcrError::InvalidShape(format!(
                "rank must be between 1 and {MAX_RANK}, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(LcrError::InvalidShape(format!("zero-length axis in {dims:?}")));
        }
        Ok(Shape(dims.to_vec()))
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major strides, in elements.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.rank()];
        for axis in (0..self.rank().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * self.0[axis + 1];
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.rank());
        index
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum()
    }

    /// Inverse of [`Shape::flat_index`].
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.rank()];
        for axis in (0..self.rank()).rev() {
            index[axis] = flat % self.0[axis];
            flat /= self.0[axis];
        }
        index
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = LcrError;

    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Shape::new(&dims)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(shape: Shape) -> Self {
        shape.0
    }
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    shape: Shape,
    data: Vec<T>,
}

/// Real-valued observations or reconstructions.
pub type DataGrid = Grid<f64>;

/// Frequency-domain counterpart of a [`DataGrid`].
pub type ComplexGrid = Grid<Complex64>;

impl<T: Clone> Grid<T> {
    pub fn filled(shape: Shape, value: T) -> Self {
        let data = vec![value; shape.len()];
        Grid { shape, data }
    }

    pub fn from_vec(shape: Shape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(LcrError::ShapeMismatch(format!(
                "shape {shape} needs {} elements, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(Grid { shape, data })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, index: &[usize]) -> &T {
        &self.data[self.shape.flat_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: T) {
        let flat = self.shape.flat_index(index);
        self.data[flat] = value;
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> Grid<U> {
        Grid {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Same data viewed under another shape of equal element count.
    pub fn reshaped(self, shape: Shape) -> Result<Self> {
        Grid::from_vec(shape, self.data)
    }

    pub fn ensure_same_shape<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.shape != other.shape {
            return Err(LcrError::ShapeMismatch(format!(
                "{what}: {} vs {}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }
}

impl DataGrid {
    /// Builds a grid and rejects NaN or infinite entries.
    pub fn new(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(LcrError::NonFiniteInput(pos));
        }
        Grid::from_vec(shape, data)
    }

    pub fn zeros(shape: Shape) -> Self {
        Grid::filled(shape, 0.0)
    }

    pub fn from_series(values: Vec<f64>) -> Result<Self> {
        let shape = Shape::new(&[values.len()])?;
        DataGrid::new(shape, values)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `‖self - other‖_F`; shapes must already agree.
    pub fn distance(&self, other: &DataGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_complex(&self) -> ComplexGrid {
        self.map(|&v| Complex64::new(v, 0.0))
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.data.iter().position(|v| !v.is_finite())
    }
}

impl ComplexGrid {
    pub fn zeros(shape: Shape) -> Self {
        Grid::filled(shape, Complex64::new(0.0, 0.0))
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }
}
