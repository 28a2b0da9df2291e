//! The square-block comparison preconditioner C = [[E+F+F^T, F^T],[F, -E]]
//! for the 2x2 real form K4 = [[E, F^T],[F, -E]]. One application costs two
//! inner solves,
//!   (E + F^T) u = f - g,   (E + F) r = g + E u,   s = u - r,
//! each run by GMRES right-preconditioned with blockdiag(S, S),
//! S = (1 + w rn) M + rn K, whose own applications are CG with an incomplete
//! Cholesky factor.

use crate::blocksys::{BlockVector4, PresbForms};
use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::sparsela::chol::IncompleteCholeskyFactor;
use crate::sparsela::csr::CsrMatrix;
use crate::sparsela::dense::DenseMatrix;
use crate::sparsela::gmres::fgmres;
use crate::sparsela::krylov::{cg, KrylovConfig, LinOp, Precond};
use crate::ProblemParams;
use std::time::Instant;

/// (E + F) or (E + F^T) as an operator over 2m vectors.
struct EPlusF<'a, 'b> {
    forms: &'b PresbForms<'a>,
    transpose: bool,
}

impl LinOp for EPlusF<'_, '_> {
    fn dim(&self) -> usize {
        2 * self.forms.block_size()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.forms.apply_e_plus_f(x, y, self.transpose);
    }
}

/// blockdiag(S, S)^-1 over 2m vectors via IC-preconditioned CG per half.
struct SBlockSolve<'a> {
    s: &'a CsrMatrix,
    ic: &'a IncompleteCholeskyFactor,
    cfg: KrylovConfig,
}

impl Precond for SBlockSolve<'_> {
    fn dim(&self) -> usize {
        2 * self.s.nrows()
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        let m = self.s.nrows();
        let mut total = 0usize;
        for half in 0..2 {
            let span = half * m..(half + 1) * m;
            let (x, rep) = cg(self.s, &r[span.clone()], Some(self.ic), &self.cfg)?;
            total += rep.iterations;
            z[span].copy_from_slice(&x);
        }
        Ok(total)
    }
}

/// The full 4m operator of the 2x2 real form, as constructed from E and F.
pub struct K4Operator<'a, 'b> {
    pub forms: &'b PresbForms<'a>,
}

impl LinOp for K4Operator<'_, '_> {
    fn dim(&self) -> usize {
        4 * self.forms.block_size()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.forms.apply_k4(x, y);
    }
}

pub struct PresbPreconditioner<'a> {
    forms: PresbForms<'a>,
    s_matrix: CsrMatrix,
    s_ic: IncompleteCholeskyFactor,
    /// Stopping rule of the inner (E +- F) solves and of the S-solves.
    pub inner: KrylovConfig,
}

impl<'a> PresbPreconditioner<'a> {
    pub fn new(
        mass: &'a CsrMatrix,
        stiffness: &'a CsrMatrix,
        params: &ProblemParams,
        inner: KrylovConfig,
        ic_droptol: f64,
    ) -> Result<Self> {
        let m = mass.nrows();
        let rn = params.nu.sqrt();
        let sw = 1.0 + params.omega * rn;
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..m {
            let (cols, vals) = mass.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, sw * v));
            }
            let (cols, vals) = stiffness.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, rn * v));
            }
        }
        let s_matrix = CsrMatrix::from_triplets(m, m, triplets)?;
        let s_ic = IncompleteCholeskyFactor::factor_with_shift_retry(&s_matrix, ic_droptol)?;
        Ok(PresbPreconditioner {
            forms: PresbForms::new(mass, stiffness, *params),
            s_matrix,
            s_ic,
            inner,
        })
    }

    pub fn forms(&self) -> &PresbForms<'a> {
        &self.forms
    }

    fn inner_solve(&self, rhs: &[f64], transpose: bool) -> Result<(Vec<f64>, usize)> {
        let op = EPlusF { forms: &self.forms, transpose };
        let spre = SBlockSolve { s: &self.s_matrix, ic: &self.s_ic, cfg: self.inner };
        // unrestarted within the inner budget: these systems are small and
        // the preconditioned counts stay low
        let cfg = KrylovConfig {
            tol_relative: self.inner.tol_relative,
            max_iterations: self.inner.max_iterations,
            restart: self.inner.max_iterations,
        };
        let (x, rep) = fgmres(&op, rhs, &spre, &cfg, None)?;
        if !rep.converged {
            return Err(Error::Unconverged(format!(
                "inner solve with E {} F stalled at {:.3e}",
                if transpose { "+ transposed" } else { "+" },
                rep.final_relative_residual()
            )));
        }
        Ok((x, rep.iterations + rep.inner_iterations_total))
    }
}

impl Precond for PresbPreconditioner<'_> {
    fn dim(&self) -> usize {
        4 * self.forms.block_size()
    }

    fn apply_into(&self, rhs: &[f64], z: &mut [f64]) -> Result<usize> {
        let m2 = 2 * self.forms.block_size();
        let (f, g) = rhs.split_at(m2);
        let mut fg = vec![0.0; m2];
        for i in 0..m2 {
            fg[i] = f[i] - g[i];
        }
        let (u, n1) = self.inner_solve(&fg, true).map_err(|e| {
            Error::Unconverged(format!("square-block preconditioner, first inner solve: {e}"))
        })?;
        let mut eu = vec![0.0; m2];
        self.forms.apply_e(&u, &mut eu);
        for i in 0..m2 {
            eu[i] += g[i];
        }
        let (r, n2) = self.inner_solve(&eu, false).map_err(|e| {
            Error::Unconverged(format!("square-block preconditioner, second inner solve: {e}"))
        })?;
        for i in 0..m2 {
            z[i] = r[i];
            z[m2 + i] = u[i] - r[i];
        }
        Ok(n1 + n2)
    }
}

/// FGMRES on the 2x2 real form (driven through the E/F construction) with
/// the square-block preconditioner.
pub fn fgmres_presb(
    pre: &PresbPreconditioner<'_>,
    bhat: &BlockVector4,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(BlockVector4, SolveReport)> {
    let op = K4Operator { forms: pre.forms() };
    let (x, report) = fgmres(&op, bhat.as_slice(), pre, cfg, deadline)?;
    Ok((BlockVector4::from_vec(x), report))
}

/// Dense K4 = [[E, F^T],[F, -E]] for verification.
pub fn dense_k4(mass: &CsrMatrix, stiffness: &CsrMatrix, params: &ProblemParams) -> DenseMatrix {
    let forms = PresbForms::new(mass, stiffness, *params);
    let n = 4 * mass.nrows();
    let mut d = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        forms.apply_k4(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            d[(i, j)] = col[i];
        }
    }
    d
}

/// Dense C = [[E+F+F^T, F^T],[F, -E]] for verification.
pub fn dense_c(mass: &CsrMatrix, stiffness: &CsrMatrix, params: &ProblemParams) -> DenseMatrix {
    let forms = PresbForms::new(mass, stiffness, *params);
    let m2 = 2 * mass.nrows();
    let mut d = dense_k4(mass, stiffness, params);
    // add F + F^T to the leading block
    let mut e = vec![0.0; m2];
    let mut f = vec![0.0; m2];
    let mut ft = vec![0.0; m2];
    for j in 0..m2 {
        e[j] = 1.0;
        forms.apply_f(&e, &mut f, false);
        forms.apply_f(&e, &mut ft, true);
        e[j] = 0.0;
        for i in 0..m2 {
            d[(i, j)] += f[i] + ft[i];
        }
    }
    d
}
