//! Compressed sparse row matrices and the mat-vec kernel.
//!
//! Rows are stored with strictly increasing column indices and summation in
//! `spmv` runs in storage order, so results are bit-reproducible.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut t: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        for &(i, j, _) in &t {
            if i >= nrows || j >= ncols {
                return Err(Error::Dimension(format!(
                    "triplet ({i},{j}) outside {nrows}x{ncols}"
                )));
            }
        }
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut rows = Vec::with_capacity(t.len());
        let mut col_indices = Vec::with_capacity(t.len());
        let mut values = Vec::with_capacity(t.len());
        for (i, j, v) in t {
            if rows.last() == Some(&i) && col_indices.last() == Some(&j) {
                // same (i, j) as the previous entry: accumulate
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_indices.push(j);
                values.push(v);
            }
        }
        let mut row_offsets = vec![0usize; nrows + 1];
        for &i in &rows {
            row_offsets[i + 1] += 1;
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(CsrMatrix { nrows, ncols, row_offsets, col_indices, values })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        CsrMatrix {
            nrows: d.len(),
            ncols: d.len(),
            row_offsets: (0..=d.len()).collect(),
            col_indices: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    /// `shift * I + scale * A` as a new matrix (A square).
    pub fn shift_scale(&self, shift: f64, scale: f64) -> Result<CsrMatrix> {
        if self.nrows != self.ncols {
            return Err(Error::Dimension("shift_scale needs a square matrix".into()));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut have_diag = false;
            for (&j, &v) in cols.iter().zip(vals) {
                let mut w = scale * v;
                if i == j {
                    w += shift;
                    have_diag = true;
                }
                triplets.push((i, j, w));
            }
            if !have_diag {
                triplets.push((i, i, shift));
            }
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, triplets)
    }

    /// y = A x.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(Error::Dimension(format!(
                "spmv: vector of length {} against {}x{} matrix",
                x.len(),
                self.nrows,
                self.ncols
            )));
        }
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// Largest |A(i,j) - A(j,i)| over the stored pattern, plus any entry whose
    /// transpose mate is missing. Zero means the matrix passes the symmetry audit.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (jcols, jvals) = self.row(j);
                match jcols.binary_search(&i) {
                    Ok(p) => worst = worst.max((v - jvals[p]).abs()),
                    Err(_) => worst = worst.max(v.abs()),
                }
            }
        }
        worst
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.symmetry_defect() == 0.0
    }
}

/// Deterministic sequential dot product; every inner product in the crate
/// funnels through this so single-column block solves match vector solves
/// bit for bit.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
    }
    acc
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// y += a * x
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
