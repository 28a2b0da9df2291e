//! The real block-diagonal comparison preconditioner with blocks
//! T = (1 + rn w) M + rn K applied independently to each of the four real
//! components via IC-preconditioned CG.

use crate::blocksys::{A4Operator, BlockVector4};
use crate::error::Result;
use crate::report::SolveReport;
use crate::sparsela::chol::IncompleteCholeskyFactor;
use crate::sparsela::csr::CsrMatrix;
use crate::sparsela::gmres::fgmres;
use crate::sparsela::krylov::{cg, KrylovConfig, Precond};
use crate::ProblemParams;
use std::time::Instant;

pub struct BdPreconditioner {
    t_matrix: CsrMatrix,
    ic: IncompleteCholeskyFactor,
    inner: KrylovConfig,
    m: usize,
}

impl BdPreconditioner {
    pub fn new(
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        params: &ProblemParams,
        inner: KrylovConfig,
        ic_droptol: f64,
    ) -> Result<Self> {
        let m = mass.nrows();
        let rn = params.nu.sqrt();
        let sw = 1.0 + rn * params.omega;
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
        let t_matrix = CsrMatrix::from_triplets(m, m, triplets)?;
        let ic = IncompleteCholeskyFactor::factor_with_shift_retry(&t_matrix, ic_droptol)?;
        Ok(BdPreconditioner { t_matrix, ic, inner, m })
    }

    pub fn block_matrix(&self) -> &CsrMatrix {
        &self.t_matrix
    }
}

impl Precond for BdPreconditioner {
    fn dim(&self) -> usize {
        4 * self.m
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        let mut total = 0usize;
        for blk in 0..4 {
            let span = blk * self.m..(blk + 1) * self.m;
            let (x, rep) = cg(&self.t_matrix, &r[span.clone()], Some(&self.ic), &self.inner)?;
            total += rep.iterations;
            z[span].copy_from_slice(&x);
        }
        Ok(total)
    }
}

pub fn fgmres_bd(
    op: &A4Operator<'_>,
    bhat: &BlockVector4,
    pre: &BdPreconditioner,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(BlockVector4, SolveReport)> {
    let (x, report) = fgmres(op, bhat.as_slice(), pre, cfg, deadline)?;
    Ok((BlockVector4::from_vec(x), report))
}
