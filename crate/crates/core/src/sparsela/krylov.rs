//! Operator/preconditioner traits and the conjugate gradient solvers: plain
//! CG and the block (global) variant for multiple right-hand sides with the
//! trace inner product.

use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::sparsela::chol::{CholeskyFactor, IncompleteCholeskyFactor};
use crate::sparsela::csr::{axpy, dot, norm2, CsrMatrix};
use crate::sparsela::multivec::MultiVector;
use std::time::Instant;

/// A square linear operator given by its action.
pub trait LinOp {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl LinOp for CsrMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.spmv_into(x, y);
    }
}

/// Preconditioner application z = P^-1 r. Returns the inner iteration count
/// spent (0 for direct applications), so nested solves can be accounted for.
pub trait Precond {
    fn dim(&self) -> usize;
    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize>;
}

impl Precond for CholeskyFactor {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        self.solve_into(r, z);
        Ok(0)
    }
}

impl Precond for IncompleteCholeskyFactor {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        self.solve_into(r, z);
        Ok(0)
    }
}

/// Stopping rule for the Krylov solvers.
#[derive(Debug, Clone, Copy)]
pub struct KrylovConfig {
    /// Stop when the residual norm has dropped below this factor times the
    /// right-hand-side norm. Must lie in (0, 1).
    pub tol_relative: f64,
    pub max_iterations: usize,
    /// Arnoldi vectors kept before a GMRES restart (ignored by CG).
    pub restart: usize,
}

impl KrylovConfig {
    pub fn new(tol_relative: f64, max_iterations: usize) -> Self {
        KrylovConfig { tol_relative, max_iterations, restart: 30 }
    }

    pub fn with_restart(mut self, restart: usize) -> Self {
        self.restart = restart;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol_relative > 0.0 && self.tol_relative < 1.0) {
            return Err(Error::Config(format!(
                "tol_relative must be in (0,1), got {}",
                self.tol_relative
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::Config("max_iterations must be >= 1".into()));
        }
        Ok(())
    }

    /// The outer stopping rule used throughout the experiments: residual
    /// down by 1e6, at most 500 iterations.
    pub fn outer_default() -> Self {
        KrylovConfig { tol_relative: 1e-6, max_iterations: 500, restart: 30 }
    }

    /// The inner stopping rule: residual down by 1e4.
    pub fn inner_default() -> Self {
        KrylovConfig { tol_relative: 1e-4, max_iterations: 500, restart: 30 }
    }
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig::outer_default()
    }
}

/// Preconditioned conjugate gradient for SPD operators.
pub fn cg(
    a: &dyn LinOp,
    b: &[f64],
    pre: Option<&dyn Precond>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!("cg: rhs length {} vs operator dim {n}", b.len())));
    }
    let norm_b = norm2(b);
    let mut report = SolveReport::default();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        report.converged = true;
        report.relative_residual_history.push(0.0);
        report.wall_time_secs = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let mut r = b.to_vec();
    let mut z = match pre {
        Some(p) => {
            let mut z = vec![0.0; n];
            report.inner_iterations_total += p.apply_into(&r, &mut z)?;
            z
        }
        None => r.clone(),
    };
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    report.relative_residual_history.push(1.0);
    for it in 1..=cfg.max_iterations {
        a.apply_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::IndefiniteOperator);
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rel = norm2(&r) / norm_b;
        report.relative_residual_history.push(rel);
        report.iterations = it;
        if rel <= cfg.tol_relative {
            report.converged = true;
            break;
        }
        match pre {
            Some(pc) => {
                report.inner_iterations_total += pc.apply_into(&r, &mut z)?;
            }
            None => z.copy_from_slice(&r),
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// Block (global) CG for A X = B with several right-hand sides, using the
/// trace inner product <X,Y> = trace(X^T Y). The operator and preconditioner
/// act column by column; the scalars couple the block. Stops when the
/// Frobenius norm of the residual block is down by `tol_relative`.
///
/// Optionally warm-started from `x0`; the stopping rule stays relative to
/// ||B||_F either way.
pub fn global_cg(
    a: &dyn LinOp,
    b: &MultiVector,
    pre: Option<&dyn Precond>,
    cfg: &KrylovConfig,
    x0: Option<&MultiVector>,
) -> Result<(MultiVector, SolveReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let n = a.dim();
    if b.nrows() != n {
        return Err(Error::Dimension(format!(
            "global_cg: rhs rows {} vs operator dim {n}",
            b.nrows()
        )));
    }
    let s = b.ncols();
    let norm_b = b.frobenius_norm();
    let mut report = SolveReport::default();
    let mut x = match x0 {
        Some(x0) => {
            assert_eq!((x0.nrows(), x0.ncols()), (n, s));
            x0.clone()
        }
        None => MultiVector::zeros(n, s),
    };
    if norm_b == 0.0 {
        report.converged = true;
        report.relative_residual_history.push(0.0);
        report.wall_time_secs = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let apply_op = |src: &MultiVector, dst: &mut MultiVector| {
        for j in 0..s {
            let mut col = vec![0.0; n];
            a.apply_into(src.col(j), &mut col);
            dst.col_mut(j).copy_from_slice(&col);
        }
    };
    let apply_pre = |src: &MultiVector, dst: &mut MultiVector| -> Result<usize> {
        let mut inner = 0;
        match pre {
            Some(p) => {
                for j in 0..s {
                    let mut col = vec![0.0; n];
                    inner += p.apply_into(src.col(j), &mut col)?;
                    dst.col_mut(j).copy_from_slice(&col);
                }
            }
            None => *dst = src.clone(),
        }
        Ok(inner)
    };

    let mut r = b.clone();
    if x0.is_some() {
        let mut ax = MultiVector::zeros(n, s);
        apply_op(&x, &mut ax);
        r.axpy(-1.0, &ax);
    }
    let rel0 = r.frobenius_norm() / norm_b;
    report.relative_residual_history.push(rel0);
    if rel0 <= cfg.tol_relative {
        report.converged = true;
        report.wall_time_secs = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }
    let mut z = MultiVector::zeros(n, s);
    report.inner_iterations_total += apply_pre(&r, &mut z)?;
    let mut p = z.clone();
    let mut rz = r.trace_dot(&z);
    let mut ap = MultiVector::zeros(n, s);
    for it in 1..=cfg.max_iterations {
        apply_op(&p, &mut ap);
        let pap = ap.trace_dot(&p);
        if pap <= 0.0 {
            return Err(Error::IndefiniteOperator);
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        let rel = r.frobenius_norm() / norm_b;
        report.relative_residual_history.push(rel);
        report.iterations = it;
        if rel <= cfg.tol_relative {
            report.converged = true;
            break;
        }
        report.inner_iterations_total += apply_pre(&r, &mut z)?;
        let rz_next = r.trace_dot(&z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.xpby(&z, beta);
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((x, report))
}
