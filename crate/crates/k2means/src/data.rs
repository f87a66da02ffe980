//! Dense row-major dataset of points to cluster.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("dataset must contain at least one point")]
    Empty,
    #[error("dimensionality must be at least 1")]
    ZeroDim,
    #[error("point count {n} times dimensionality {d} does not match {len} values")]
    ShapeMismatch { n: usize, d: usize, len: usize },
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
}

/// An n x d matrix of points, stored row-major in double precision.
/// Every entry is finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    pub fn new(points: Vec<f64>, n: usize, d: usize) -> Result<Self, DataError> {
        if n == 0 {
            return Err(DataError::Empty);
        }
        if d == 0 {
            return Err(DataError::ZeroDim);
        }
        if points.len() != n * d {
            return Err(DataError::ShapeMismatch { n, d, len: points.len() });
        }
        for (i, v) in points.iter().enumerate() {
            if !v.is_finite() {
                return Err(DataError::NonFinite { row: i / d, col: i % d });
            }
        }
        Ok(Self { points, n, d })
    }

    /// Build from per-point rows; all rows must share one dimensionality.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DataError> {
        let n = rows.len();
        if n == 0 {
            return Err(DataError::Empty);
        }
        let d = rows[0].len();
        let mut points = Vec::with_capacity(n * d);
        for row in rows {
            if row.len() != d {
                return Err(DataError::ShapeMismatch { n, d, len: row.len() });
            }
            points.extend_from_slice(row);
        }
        Self::new(points, n, d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.points
    }
}
