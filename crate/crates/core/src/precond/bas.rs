//! The block alternating splitting comparison method on the complex 2x2
//! system, carried as paired real blocks (Re y; Im y; Re q; Im q), plus its
//! induced preconditioner.
//!
//! The two preconditioned splittings P1 A = H1 + S1 and P2 A = H2 + S2 use
//!   H1 = blockdiag(M, M),        S1 = c [[-i w n K, rn K], [-rn K, i w n K]],
//!   H2 = blockdiag(rn K, rn K),  S2 = [[i w rn M, -M], [M, -i w rn M]],
//! c = 1/(1 + w^2 n), rn = sqrt(n), with P1 = c [[I, -i w rn I],[i w rn I, -I]]
//! and P2 = [[0, I],[I, 0]] derived from the consistency requirement (the
//! fixed point must solve A x = b). With V = H1 the half-step coefficients
//! are (1+alpha) M and alpha M + rn K; their inner solves are warm-started
//! from the current iterate so the inner "reduce by 1e4" rule tightens as
//! the outer residual falls.

use crate::blocksys::{A4Operator, BlockVector4};
use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::sparsela::chol::IncompleteCholeskyFactor;
use crate::sparsela::csr::{norm2, CsrMatrix};
use crate::sparsela::dense::DenseMatrix;
use crate::sparsela::gmres::fgmres;
use crate::sparsela::krylov::{global_cg, KrylovConfig, LinOp, Precond};
use crate::sparsela::multivec::MultiVector;
use crate::ProblemParams;
use num_complex::Complex64;
use std::time::Instant;

/// Iteration-parameter choices recommended for the method: alpha = 1 + n w^2
/// for the stationary iteration and (1 + n w^2)/(1 + rn w) for the
/// preconditioner.
pub fn bas_iteration_alpha(params: &ProblemParams) -> f64 {
    1.0 + params.nu * params.omega * params.omega
}

pub fn bas_preconditioner_alpha(params: &ProblemParams) -> f64 {
    (1.0 + params.nu * params.omega * params.omega)
        / (1.0 + params.nu.sqrt() * params.omega)
}

#[derive(Debug, Clone, Copy)]
pub struct BasConfig {
    /// Splitting shift; defaults to 1 + nu omega^2 when `None`.
    pub alpha: Option<f64>,
    pub outer: KrylovConfig,
    pub inner: KrylovConfig,
    pub ic_droptol: f64,
}

impl Default for BasConfig {
    fn default() -> Self {
        BasConfig {
            alpha: None,
            outer: KrylovConfig::outer_default(),
            inner: KrylovConfig::inner_default(),
            ic_droptol: 1e-3,
        }
    }
}

struct HalfStepTerms<'a> {
    mass: &'a CsrMatrix,
    stiffness: &'a CsrMatrix,
    m: usize,
    alpha: f64,
    c: f64,
    rn: f64,
    w: f64,
}

impl HalfStepTerms<'_> {
    fn mass_blocks(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 4 * self.m];
        for blk in 0..4 {
            let span = blk * self.m..(blk + 1) * self.m;
            self.mass.spmv_into(&x[span.clone()], &mut out[span]);
        }
        out
    }

    fn stiff_blocks(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; 4 * self.m];
        for blk in 0..4 {
            let span = blk * self.m..(blk + 1) * self.m;
            self.stiffness.spmv_into(&x[span.clone()], &mut out[span]);
        }
        out
    }

    /// alpha V x - S1 x + P1 b (V = H1), the first half-step's right side.
    fn rhs_first(&self, x: &[f64], yhat: &[f64]) -> Vec<f64> {
        let (m, alpha, c, rn, wn) = (self.m, self.alpha, self.c, self.rn, self.w);
        // w n = omega nu appears in the off-diagonal of S1: i omega nu K
        let on = wn * rn; // omega sqrt(nu) * sqrt(nu) = omega nu
        let mx = self.mass_blocks(x);
        let kx = self.stiff_blocks(x);
        let mut rhs = vec![0.0; 4 * m];
        for i in 0..m {
            let (kyr, kyi, kqr, kqi) = (kx[i], kx[m + i], kx[2 * m + i], kx[3 * m + i]);
            rhs[i] = alpha * mx[i] - c * (on * kyi + rn * kqr) + c * yhat[i];
            rhs[m + i] = alpha * mx[m + i] - c * (-on * kyr + rn * kqi);
            rhs[2 * m + i] = alpha * mx[2 * m + i] - c * (-rn * kyr - on * kqi);
            rhs[3 * m + i] = alpha * mx[3 * m + i] - c * (-rn * kyi + on * kqr) + c * wn * yhat[i];
        }
        rhs
    }

    /// alpha V x - S2 x + P2 b, the second half-step's right side.
    fn rhs_second(&self, x: &[f64], yhat: &[f64]) -> Vec<f64> {
        let (m, alpha, wn) = (self.m, self.alpha, self.w);
        let mx = self.mass_blocks(x);
        let mut rhs = vec![0.0; 4 * m];
        for i in 0..m {
            let (myr, myi, mqr, mqi) = (mx[i], mx[m + i], mx[2 * m + i], mx[3 * m + i]);
            rhs[i] = alpha * myr + wn * myi + mqr;
            rhs[m + i] = alpha * myi - wn * myr + mqi;
            rhs[2 * m + i] = alpha * mqr - myr - wn * mqi + yhat[i];
            rhs[3 * m + i] = alpha * mqi - myi + wn * mqr;
        }
        rhs
    }
}

/// The stationary iteration with inexact (block CG) half-step solves,
/// monitored on the relative residual of the complex system, which equals
/// the 4x4 real form's relative residual on this layout.
pub fn ibas_solve(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    params: &ProblemParams,
    yhat: &[f64],
    cfg: &BasConfig,
    deadline: Option<Instant>,
) -> Result<(BlockVector4, SolveReport)> {
    cfg.outer.validate()?;
    cfg.inner.validate()?;
    let start = Instant::now();
    let m = mass.nrows();
    if yhat.len() != m {
        return Err(Error::Dimension("ibas_solve: target length".into()));
    }
    let alpha = cfg.alpha.unwrap_or_else(|| bas_iteration_alpha(params));
    if !(alpha > 0.0) {
        return Err(Error::Config("bas alpha must be positive".into()));
    }
    let rn = params.nu.sqrt();
    let w = params.omega * rn;
    let c = 1.0 / (1.0 + params.omega * params.omega * params.nu);
    let terms = HalfStepTerms { mass, stiffness, m, alpha, c, rn, w };

    let w1 = mass.shift_scale(0.0, 1.0 + alpha)?;
    let mut w2_triplets: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..m {
        let (cols, vals) = mass.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            w2_triplets.push((i, j, alpha * v));
        }
        let (cols, vals) = stiffness.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            w2_triplets.push((i, j, rn * v));
        }
    }
    let w2 = CsrMatrix::from_triplets(m, m, w2_triplets)?;
    let pre1 = IncompleteCholeskyFactor::factor_with_shift_retry(&w1, cfg.ic_droptol)?;
    let pre2 = IncompleteCholeskyFactor::factor_with_shift_retry(&w2, cfg.ic_droptol)?;

    let a4 = A4Operator::new(mass, stiffness, *params);
    let mut bhat = BlockVector4::zeros(m);
    bhat.block_mut(0).copy_from_slice(yhat);
    let norm_b = bhat.norm();
    let mut x = BlockVector4::zeros(m);
    let mut report = SolveReport::default();
    if norm_b == 0.0 {
        report.converged = true;
        report.relative_residual_history.push(0.0);
        report.wall_time_secs = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    // warm-started inner solve: correct the current iterate so the inner
    // tolerance acts on the increment residual
    let warm_solve = |coeff: &CsrMatrix,
                      pre: &IncompleteCholeskyFactor,
                      rhs: &[f64],
                      x0: &[f64],
                      inner_total: &mut usize|
     -> Result<Vec<f64>> {
        let mut r0 = vec![0.0; 4 * m];
        for blk in 0..4 {
            let span = blk * m..(blk + 1) * m;
            coeff.spmv_into(&x0[span.clone()], &mut r0[span]);
        }
        for i in 0..4 * m {
            r0[i] = rhs[i] - r0[i];
        }
        let b = MultiVector::from_contiguous(&r0, m);
        let (delta, rep) = global_cg(coeff, &b, Some(pre), &cfg.inner, None)?;
        *inner_total += rep.iterations;
        let mut out = x0.to_vec();
        for (oi, di) in out.iter_mut().zip(delta.as_slice()) {
            *oi += di;
        }
        Ok(out)
    };

    let mut r = vec![0.0; 4 * m];
    for sweep in 0..=cfg.outer.max_iterations {
        a4.apply_into(x.as_slice(), &mut r);
        for i in 0..4 * m {
            r[i] = bhat.as_slice()[i] - r[i];
        }
        let rel = norm2(&r) / norm_b;
        report.relative_residual_history.push(rel);
        report.iterations = sweep;
        if rel <= cfg.outer.tol_relative {
            report.converged = true;
            break;
        }
        if sweep == cfg.outer.max_iterations {
            break;
        }
        if let Some(d) = deadline {
            if Instant::now() >= d {
                report.timed_out = true;
                break;
            }
        }
        let mut inner = 0usize;
        let rhs1 = terms.rhs_first(x.as_slice(), yhat);
        let xh = warm_solve(&w1, &pre1, &rhs1, x.as_slice(), &mut inner)?;
        let rhs2 = terms.rhs_second(&xh, yhat);
        let xn = warm_solve(&w2, &pre2, &rhs2, &xh, &mut inner)?;
        x.as_mut_slice().copy_from_slice(&xn);
        report.inner_iterations_total += inner;
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// y = [[I, qI],[conj(q) I, -I]] x over complex block pairs, scaled.
fn apply_block_rotation(q: Complex64, scale: f64, x: &[f64], y: &mut [f64]) {
    let m = x.len() / 4;
    for i in 0..m {
        let r1 = Complex64::new(x[i], x[m + i]);
        let r2 = Complex64::new(x[2 * m + i], x[3 * m + i]);
        let t1 = (r1 + q * r2) * scale;
        let t2 = (q.conj() * r1 - r2) * scale;
        y[i] = t1.re;
        y[m + i] = t1.im;
        y[2 * m + i] = t2.re;
        y[3 * m + i] = t2.im;
    }
}

fn rotation_coeff(params: &ProblemParams) -> Complex64 {
    Complex64::new(
        1.0 + params.omega * params.omega * params.nu,
        -params.omega * params.nu.sqrt(),
    )
}

/// The scalar 2x2 block factor P(alpha) of the induced preconditioner.
pub fn apply_bas_rotation(params: &ProblemParams, alpha: f64, x: &[f64], y: &mut [f64]) {
    let q = rotation_coeff(params);
    let s = 1.0 / (alpha * (2.0 + params.omega * params.omega * params.nu));
    apply_block_rotation(q, s, x, y);
}

/// Its analytic inverse: the same pattern rescaled by Q^2 = (1+|q|^2) I.
pub fn apply_bas_rotation_inverse(params: &ProblemParams, alpha: f64, x: &[f64], y: &mut [f64]) {
    let q = rotation_coeff(params);
    let s = alpha * (2.0 + params.omega * params.omega * params.nu) / (1.0 + q.norm_sqr());
    apply_block_rotation(q, s, x, y);
}

/// The induced preconditioner P_BAS = (1+alpha) P(alpha) blockdiag(alpha M + rn K):
/// applied via the analytic block-rotation inverse followed by two complex
/// solves with alpha M + rn K (four real columns through the block CG).
pub struct BasPreconditioner {
    pub alpha: f64,
    params: ProblemParams,
    coeff: CsrMatrix,
    pre: IncompleteCholeskyFactor,
    inner: KrylovConfig,
    m: usize,
}

impl BasPreconditioner {
    pub fn new(
        mass: &CsrMatrix,
        stiffness: &CsrMatrix,
        params: &ProblemParams,
        alpha: Option<f64>,
        inner: KrylovConfig,
        ic_droptol: f64,
    ) -> Result<Self> {
        let alpha = alpha.unwrap_or_else(|| bas_preconditioner_alpha(params));
        if !(alpha > 0.0) {
            return Err(Error::Config("bas alpha must be positive".into()));
        }
        let m = mass.nrows();
        let rn = params.nu.sqrt();
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..m {
            let (cols, vals) = mass.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, alpha * v));
            }
            let (cols, vals) = stiffness.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                triplets.push((i, j, rn * v));
            }
        }
        let coeff = CsrMatrix::from_triplets(m, m, triplets)?;
        let pre = IncompleteCholeskyFactor::factor_with_shift_retry(&coeff, ic_droptol)?;
        Ok(BasPreconditioner { alpha, params: *params, coeff, pre, inner, m })
    }
}

impl Precond for BasPreconditioner {
    fn dim(&self) -> usize {
        4 * self.m
    }

    fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<usize> {
        let mut w = vec![0.0; 4 * self.m];
        apply_bas_rotation_inverse(&self.params, self.alpha, r, &mut w);
        for v in &mut w {
            *v /= 1.0 + self.alpha;
        }
        let rhs = MultiVector::from_contiguous(&w, self.m);
        let (sol, rep) = global_cg(&self.coeff, &rhs, Some(&self.pre), &self.inner, None)?;
        z.copy_from_slice(sol.as_slice());
        Ok(rep.iterations)
    }
}

/// FGMRES on the 4x4 real form preconditioned by P_BAS.
pub fn fgmres_bas(
    op: &A4Operator<'_>,
    bhat: &BlockVector4,
    pre: &BasPreconditioner,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(BlockVector4, SolveReport)> {
    let (x, report) = fgmres(op, bhat.as_slice(), pre, cfg, deadline)?;
    Ok((BlockVector4::from_vec(x), report))
}

/// Real 4m x 4m embedding of the complex iteration matrix
/// (alpha V + H2)^-1 (alpha V - S2)(alpha V + H1)^-1 (alpha V - S1), V = H1,
/// for the desk-scale spectral-radius sanity check.
pub fn dense_bas_iteration_matrix(
    mass: &CsrMatrix,
    stiffness: &CsrMatrix,
    params: &ProblemParams,
    alpha: f64,
) -> Result<DenseMatrix> {
    let m = mass.nrows();
    if 4 * m > 900 {
        return Err(Error::SizeGuard(format!("dense BAS iteration matrix wants 4m <= 900, got {}", 4 * m)));
    }
    let rn = params.nu.sqrt();
    let w = params.omega * rn;
    let on = params.omega * params.nu;
    let c = 1.0 / (1.0 + params.omega * params.omega * params.nu);
    let n = 4 * m;

    // real embedding of scalar * (complex 2x2 block pattern) tensored with a
    // real matrix: complex block (bi, bj) lands on real blocks (2bi+{0,1}, 2bj+{0,1})
    let put = |d: &mut DenseMatrix, bi: usize, bj: usize, a: &CsrMatrix, z: Complex64| {
        for i in 0..m {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let (re, im) = (z.re * v, z.im * v);
                d[(2 * bi * m + i, 2 * bj * m + j)] += re;
                d[(2 * bi * m + i, (2 * bj + 1) * m + j)] -= im;
                d[((2 * bi + 1) * m + i, 2 * bj * m + j)] += im;
                d[((2 * bi + 1) * m + i, (2 * bj + 1) * m + j)] += re;
            }
        }
    };

    let one = Complex64::new(1.0, 0.0);
    let i_unit = Complex64::new(0.0, 1.0);

    // alpha V + H1 = (1 + alpha) blockdiag(M, M)
    let mut av_h1 = DenseMatrix::zeros(n, n);
    put(&mut av_h1, 0, 0, mass, one * (1.0 + alpha));
    put(&mut av_h1, 1, 1, mass, one * (1.0 + alpha));
    // alpha V - S1
    let mut av_s1 = DenseMatrix::zeros(n, n);
    put(&mut av_s1, 0, 0, mass, one * alpha);
    put(&mut av_s1, 1, 1, mass, one * alpha);
    put(&mut av_s1, 0, 0, stiffness, i_unit * (c * on));
    put(&mut av_s1, 0, 1, stiffness, -one * (c * rn));
    put(&mut av_s1, 1, 0, stiffness, one * (c * rn));
    put(&mut av_s1, 1, 1, stiffness, -i_unit * (c * on));
    // alpha V + H2 = blockdiag(alpha M + rn K)
    let mut av_h2 = DenseMatrix::zeros(n, n);
    put(&mut av_h2, 0, 0, mass, one * alpha);
    put(&mut av_h2, 1, 1, mass, one * alpha);
    put(&mut av_h2, 0, 0, stiffness, one * rn);
    put(&mut av_h2, 1, 1, stiffness, one * rn);
    // alpha V - S2
    let mut av_s2 = DenseMatrix::zeros(n, n);
    put(&mut av_s2, 0, 0, mass, one * alpha - i_unit * w);
    put(&mut av_s2, 0, 1, mass, one);
    put(&mut av_s2, 1, 0, mass, -one);
    put(&mut av_s2, 1, 1, mass, one * alpha + i_unit * w);

    let first = av_h1.solve_matrix(&av_s1)?;
    let second = av_h2.solve_matrix(&av_s2.matmul(&first))?;
    Ok(second)
}
