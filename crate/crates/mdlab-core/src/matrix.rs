//! Minimal dense row-major matrix.
//!
//! The instances in this domain are desk-scale (firms x goods well below
//! 10^5 entries), so a flat `Vec` with row slices is all we need.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix of scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Mat<F> {
    /// Build from a flat row-major buffer.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {rows}x{cols} = {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from nested rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|row| row.iter().copied()).collect(),
        })
    }

    /// Matrix of a constant value.
    pub fn filled(rows: usize, cols: usize, value: F) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> F {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column sums (length `cols`).
    pub fn col_sums(&self) -> Vec<F> {
        let mut sums = vec![F::zero(); self.cols];
        for i in 0..self.rows {
            for (j, s) in sums.iter_mut().enumerate() {
                *s = *s + self.at(i, j);
            }
        }
        sums
    }

    /// Row sums (length `rows`).
    pub fn row_sums(&self) -> Vec<F> {
        (0..self.rows)
            .map(|i| self.row(i).iter().copied().sum())
            .collect()
    }

    /// Flat row-major view.
    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    /// Elementwise map.
    pub fn map(&self, f: impl Fn(F) -> F) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Nested-row representation (used by the JSON layer).
    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_sums() {
        let m = Mat::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert_eq!(m.col_sums(), vec![4.0, 6.0]);
        assert_eq!(m.row_sums(), vec![3.0, 7.0]);
        assert_eq!(m.at(1, 0), 3.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Mat::from_rows(&[vec![1.0], vec![2.0, 3.0]]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }
}
