//! Sparse Cholesky: an exact factorization for the shifted SPD blocks and a
//! threshold-dropping incomplete variant used as a preconditioner.
//!
//! Both run the same up-looking row algorithm in natural ordering (the Q1
//! matrices here are banded, so no fill-reducing permutation is applied);
//! the incomplete path drops |L(i,k)| < droptol * ||A row i||_2 and skips the
//! corresponding updates.

use crate::error::{Error, Result};
use crate::sparsela::csr::CsrMatrix;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
struct LowerFactor {
    n: usize,
    // strictly lower triangle, row-wise with increasing column indices
    row_offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl LowerFactor {
    /// Up-looking row Cholesky. For row i it forward-substitutes
    /// L[0..i,0..i] y = A[i,0..i] with column access to the finished rows,
    /// drops small entries when droptol > 0, then takes the pivot square root.
    fn factor(a: &CsrMatrix, droptol: f64) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension("Cholesky needs a square matrix".into()));
        }
        let n = a.nrows();
        let mut row_offsets = vec![0usize];
        let mut cols: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut diag = vec![0.0; n];
        // column lists of the finished part of L, sorted by row
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut col_vals: Vec<Vec<f64>> = vec![Vec::new(); n];

        let mut w = vec![0.0; n];
        let mut marked = vec![false; n];
        let mut heap: BinaryHeap<Reverse<usize>> = BinaryHeap::new();
        let mut touched: Vec<usize> = Vec::new();

        for i in 0..n {
            let (acols, avals) = a.row(i);
            let row_norm = acols.iter().zip(avals).map(|(_, v)| v * v).sum::<f64>().sqrt();
            let threshold = droptol * row_norm;
            let mut diag_acc = 0.0;
            for (&j, &v) in acols.iter().zip(avals) {
                if j < i {
                    w[j] = v;
                    marked[j] = true;
                    heap.push(Reverse(j));
                    touched.push(j);
                } else if j == i {
                    diag_acc = v;
                }
            }
            let row_start = cols.len();
            while let Some(Reverse(k)) = heap.pop() {
                let y = w[k] / diag[k];
                if droptol > 0.0 && y.abs() < threshold {
                    continue;
                }
                cols.push(k);
                vals.push(y);
                diag_acc -= y * y;
                for (&r, &lrk) in col_rows[k].iter().zip(&col_vals[k]) {
                    if marked[r] {
                        w[r] -= lrk * y;
                    } else {
                        w[r] = -lrk * y;
                        marked[r] = true;
                        heap.push(Reverse(r));
                        touched.push(r);
                    }
                }
            }
            for &j in &touched {
                w[j] = 0.0;
                marked[j] = false;
            }
            touched.clear();
            if diag_acc <= 0.0 {
                return Err(Error::NotSpd { row: i, pivot: diag_acc });
            }
            diag[i] = diag_acc.sqrt();
            for p in row_start..cols.len() {
                col_rows[cols[p]].push(i);
                col_vals[cols[p]].push(vals[p]);
            }
            row_offsets.push(cols.len());
        }
        Ok(LowerFactor { n, row_offsets, cols, vals, diag })
    }

    /// x = (L L^T)^-1 b via forward and backward substitution.
    fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        x.copy_from_slice(b);
        for i in 0..self.n {
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            let mut acc = x[i];
            for (&j, &v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                acc -= v * x[j];
            }
            x[i] = acc / self.diag[i];
        }
        for i in (0..self.n).rev() {
            let xi = x[i] / self.diag[i];
            x[i] = xi;
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            for (&j, &v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                x[j] -= v * xi;
            }
        }
    }

    fn lower_triangle(&self) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(self.cols.len() + self.n);
        for i in 0..self.n {
            let span = self.row_offsets[i]..self.row_offsets[i + 1];
            for (&j, &v) in self.cols[span.clone()].iter().zip(&self.vals[span]) {
                triplets.push((i, j, v));
            }
            triplets.push((i, i, self.diag[i]));
        }
        CsrMatrix::from_triplets(self.n, self.n, triplets).expect("factor triplets are in range")
    }
}

/// Exact sparse Cholesky factor, A = L L^T.
pub struct CholeskyFactor {
    inner: LowerFactor,
    /// Fill-reducing ordering; `None` means natural order (the banded
    /// matrices in this crate need none).
    pub permutation: Option<Vec<usize>>,
}

impl CholeskyFactor {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Ok(CholeskyFactor { inner: LowerFactor::factor(a, 0.0)?, permutation: None })
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.inner.n];
        self.inner.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        self.inner.solve_into(b, x);
    }

    /// L including its diagonal, for audits.
    pub fn lower_triangle(&self) -> CsrMatrix {
        self.inner.lower_triangle()
    }
}

/// Incomplete Cholesky factor with threshold dropping; preconditioner only,
/// never an exact solve.
pub struct IncompleteCholeskyFactor {
    inner: LowerFactor,
    pub drop_tolerance: f64,
}

impl IncompleteCholeskyFactor {
    pub fn factor(a: &CsrMatrix, droptol: f64) -> Result<Self> {
        if droptol < 0.0 {
            return Err(Error::Config("ichol droptol must be >= 0".into()));
        }
        Ok(IncompleteCholeskyFactor {
            inner: LowerFactor::factor(a, droptol)?,
            drop_tolerance: droptol,
        })
    }

    /// Factor with one breakdown retry on A + 1e-3 diag(A).
    pub fn factor_with_shift_retry(a: &CsrMatrix, droptol: f64) -> Result<Self> {
        match Self::factor(a, droptol) {
            Ok(f) => Ok(f),
            Err(Error::NotSpd { .. }) => {
                let d = a.diagonal();
                let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(a.nnz() + a.nrows());
                for i in 0..a.nrows() {
                    let (cols, vals) = a.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        triplets.push((i, j, v));
                    }
                    triplets.push((i, i, 1e-3 * d[i]));
                }
                let shifted = CsrMatrix::from_triplets(a.nrows(), a.ncols(), triplets)?;
                Self::factor(&shifted, droptol)
            }
            Err(e) => Err(e),
        }
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.inner.n];
        self.inner.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        self.inner.solve_into(b, x);
    }

    pub fn lower_triangle(&self) -> CsrMatrix {
        self.inner.lower_triangle()
    }

    pub fn diag_min(&self) -> f64 {
        self.inner.diag.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
