//! Column-major multivectors: the simultaneous right-hand sides of the block
//! inner solves.

use crate::sparsela::csr::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiVector {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl MultiVector {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        assert!(ncols >= 1, "a multivector holds at least one column");
        MultiVector { nrows, ncols, data: vec![0.0; nrows * ncols] }
    }

    pub fn from_columns(cols: &[&[f64]]) -> Self {
        assert!(!cols.is_empty());
        let nrows = cols[0].len();
        let mut mv = MultiVector::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows);
            mv.col_mut(j).copy_from_slice(c);
        }
        mv
    }

    /// Wrap a contiguous block-vector as columns of length `nrows`.
    pub fn from_contiguous(data: &[f64], nrows: usize) -> Self {
        assert_eq!(data.len() % nrows, 0);
        let ncols = data.len() / nrows;
        assert!(ncols >= 1);
        MultiVector { nrows, ncols, data: data.to_vec() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// trace(X^T Y): the block inner product. Column by column in storage
    /// order so the one-column case reduces to the plain dot product exactly.
    pub fn trace_dot(&self, other: &MultiVector) -> f64 {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut acc = 0.0;
        for j in 0..self.ncols {
            acc += dot(self.col(j), other.col(j));
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.trace_dot(self).sqrt()
    }

    /// self += a * other
    pub fn axpy(&mut self, a: f64, other: &MultiVector) {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// self = other + b * self
    pub fn xpby(&mut self, other: &MultiVector, b: f64) {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x = y + b * *x;
        }
    }
}
