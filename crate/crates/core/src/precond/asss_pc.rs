//! The splitting-induced preconditioner P = (1/alpha)(I+G)^-1 (alpha I + M) G (alpha I + K)
//! and its application
//!   v = -alpha (I + G) r
//!   (alpha I + M) w = v
//!   z = G w
//!   (alpha I + K) s = z
//! Exact mode shares two Cholesky factors; inexact mode runs the block CG on
//! four-column blocks with incomplete-Cholesky preconditioning, which makes
//! the application slightly nonlinear, so the outer driver must be FGMRES.

use crate::blocksys::{dense as bdense, BOperator, BlockVector4};
use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::sparsela::chol::{CholeskyFactor, IncompleteCholeskyFactor};
use crate::sparsela::csr::CsrMatrix;
use crate::sparsela::dense::DenseMatrix;
use crate::sparsela::gmres::fgmres;
use crate::sparsela::krylov::{global_cg, KrylovConfig, Precond};
use crate::sparsela::multivec::MultiVector;
use crate::GOperator;
use crate::ProblemParams;
use std::time::Instant;

enum InnerSolver {
    Exact {
        mass_factor: CholeskyFactor,
        stiff_factor: CholeskyFactor,
    },
    Inexact {
        shifted_mass: CsrMatrix,
        shifted_stiff: CsrMatrix,
        mass_pre: IncompleteCholeskyFactor,
        stiff_pre: IncompleteCholeskyFactor,
        cfg: KrylovConfig,
    },
}

pub struct AsssPreconditioner {
    pub alpha: f64,
    g: GOperator,
    m: usize,
    inner: InnerSolver,
}

impl AsssPreconditioner {
    /// Shared Cholesky factors of the two shifted blocks.
    pub fn exact(
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        params: &ProblemParams,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Config("preconditioner shift must be positive".into()));
        }
        let mass_factor = CholeskyFactor::factor(&mass.shift_scale(alpha, 1.0)?)?;
        let stiff_factor = CholeskyFactor::factor(&stiffness.shift_scale(alpha, params.eta)?)?;
        Ok(AsssPreconditioner {
            alpha,
            g: GOperator::new(params),
            m: mass.nrows(),
            inner: InnerSolver::Exact { mass_factor, stiff_factor },
        })
    }

    /// Block-CG inner solves with incomplete-Cholesky preconditioning.
    pub fn inexact(
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        params: &ProblemParams,
        alpha: f64,
        inner_cfg: KrylovConfig,
        ic_droptol: f64,
    ) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Config("preconditioner shift must be positive".into()));
        }
        let shifted_mass = mass.shift_scale(alpha, 1.0)?;
        let shifted_stiff = stiffness.shift_scale(alpha, params.eta)?;
        let mass_pre = IncompleteCholeskyFactor::factor_with_shift_retry(&shifted_mass, ic_droptol)?;
        let stiff_pre =
            IncompleteCholeskyFactor::factor_with_shift_retry(&shifted_stiff, ic_droptol)?;
        Ok(AsssPreconditioner {
            alpha,
            g: GOperator::new(params),
            m: mass.nrows(),
            inner: InnerSolver::Inexact {
                shifted_mass,
                shifted_stiff,
                mass_pre,
                stiff_pre,
                cfg: inner_cfg,
            },
        })
    }
}

impl Precond for AsssPreconditioner {
    fn dim(&self) -> usize {
        4 * self.m
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        let n = 4 * self.m;
        debug_assert_eq!(r.len(), n);
        let mut v = vec![0.0; n];
        self.g.apply_into(r, &mut v);
        for (vi, ri) in v.iter_mut().zip(r) {
            *vi = -self.alpha * (ri + *vi);
        }
        let mut inner_total = 0usize;
        let mut w = vec![0.0; n];
        match &self.inner {
            InnerSolver::Exact { mass_factor, stiff_factor } => {
                for blk in 0..4 {
                    let span = blk * self.m..(blk + 1) * self.m;
                    mass_factor.solve_into(&v[span.clone()], &mut w[span]);
                }
                let mut gw = vec![0.0; n];
                self.g.apply_into(&w, &mut gw);
                for blk in 0..4 {
                    let span = blk * self.m..(blk + 1) * self.m;
                    stiff_factor.solve_into(&gw[span.clone()], &mut z[span]);
                }
            }
            InnerSolver::Inexact { shifted_mass, shifted_stiff, mass_pre, stiff_pre, cfg } => {
                let rhs = MultiVector::from_contiguous(&v, self.m);
                let (sol, rep) = global_cg(shifted_mass, &rhs, Some(mass_pre), cfg, None)?;
                inner_total += rep.iterations;
                w.copy_from_slice(sol.as_slice());
                let mut gw = vec![0.0; n];
                self.g.apply_into(&w, &mut gw);
                let rhs = MultiVector::from_contiguous(&gw, self.m);
                let (sol, rep) = global_cg(shifted_stiff, &rhs, Some(stiff_pre), cfg, None)?;
                inner_total += rep.iterations;
                z.copy_from_slice(sol.as_slice());
            }
        }
        Ok(inner_total)
    }
}

/// Right-preconditioned FGMRES on the block system B x = b.
pub fn fgmres_asss(
    op: &BOperator<'_>,
    b: &BlockVector4,
    pre: &AsssPreconditioner,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(BlockVector4, SolveReport)> {
    let (x, report) = fgmres(op, b.as_slice(), pre, cfg, deadline)?;
    Ok((BlockVector4::from_vec(x), report))
}

/// Dense P = (1/alpha)(I+G)^-1 (alpha I + M) G (alpha I + K), with the
/// inverse taken by LU (desk scale only).
pub fn dense_p_alpha(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    params: &ProblemParams,
    alpha: f64,
) -> Result<DenseMatrix> {
    let n = 4 * mass.nrows();
    let eye = DenseMatrix::identity(n);
    let g = bdense::g_matrix(params, mass.nrows());
    let mb = bdense::block_diag4(mass, 1.0);
    let kb = bdense::block_diag4(stiffness, params.eta);
    let i_plus_g = eye.add_scaled(1.0, &g);
    let a_plus_m = eye.scale(alpha).add_scaled(1.0, &mb);
    let a_plus_k = eye.scale(alpha).add_scaled(1.0, &kb);
    let tail = a_plus_m.matmul(&g.matmul(&a_plus_k));
    Ok(i_plus_g.solve_matrix(&tail)?.scale(1.0 / alpha))
}

/// Dense Q = (1/alpha)(I+G)^-1 (alpha G - M)(alpha I - G K); B = P - Q and
/// T = P^-1 Q.
pub fn dense_q_alpha(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    params: &ProblemParams,
    alpha: f64,
) -> Result<DenseMatrix> {
    let n = 4 * mass.nrows();
    let eye = DenseMatrix::identity(n);
    let g = bdense::g_matrix(params, mass.nrows());
    let mb = bdense::block_diag4(mass, 1.0);
    let kb = bdense::block_diag4(stiffness, params.eta);
    let i_plus_g = eye.add_scaled(1.0, &g);
    let ag_minus_m = g.scale(alpha).add_scaled(-1.0, &mb);
    let a_minus_gk = eye.scale(alpha).add_scaled(-1.0, &g.matmul(&kb));
    let tail = ag_minus_m.matmul(&a_minus_gk);
    Ok(i_plus_g.solve_matrix(&tail)?.scale(1.0 / alpha))
}

/// Dense preconditioned operator P^-1 B assembled through the direct route
/// (LU solves against the literal dense P).
pub fn dense_preconditioned_b(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    params: &ProblemParams,
    alpha: f64,
) -> Result<DenseMatrix> {
    let p = dense_p_alpha(mass, stiffness, params, alpha)?;
    let b = bdense::b_matrix(mass, stiffness, params);
    p.solve_matrix(&b)
}
