//! The 4x4 block real formulation: the operator B = M + G K (blockwise), the
//! matrix-free skew operator G, the transformed right-hand side, the PRESB
//! 2x2 real form and the recovery of the complex state and control.

use crate::error::{Error, Result};
use crate::fem::GridConfig;
use crate::sparsela::csr::{norm2, CsrMatrix};
use crate::sparsela::dense::DenseMatrix;
use crate::sparsela::krylov::LinOp;
use num_complex::Complex64;

/// Problem scalars: regularization nu > 0, frequency omega >= 0 and the
/// derived stiffness scaling eta = sqrt(nu)/sqrt(1 + nu omega^2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub nu: f64,
    pub omega: f64,
    pub eta: f64,
    pub grid: GridConfig,
}

impl ProblemParams {
    pub fn new(nu: f64, omega: f64, grid: GridConfig) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {nu}")));
        }
        if !(omega >= 0.0) {
            return Err(Error::Config(format!("omega must be nonnegative, got {omega}")));
        }
        let eta = nu.sqrt() / (1.0 + nu * omega * omega).sqrt();
        Ok(ProblemParams { nu, omega, eta, grid })
    }
}

/// A real vector of length 4m split into four m-blocks
/// (Re y; Im y; Re q; Im q).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector4 {
    data: Vec<f64>,
    m: usize,
}

impl BlockVector4 {
    pub fn zeros(m: usize) -> Self {
        BlockVector4 { data: vec![0.0; 4 * m], m }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        assert_eq!(data.len() % 4, 0, "block vector length must be divisible by 4");
        let m = data.len() / 4;
        BlockVector4 { data, m }
    }

    pub fn block_size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn block(&self, i: usize) -> &[f64] {
        assert!(i < 4);
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        assert!(i < 4);
        &mut self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }
}

/// The matrix-free operator G of the block real form: a two-scalar
/// recombination of the four blocks with a = omega nu c, b = sqrt(nu) c,
/// c = 1/sqrt(nu (1 + nu omega^2)), so that a^2 + b^2 = 1 and G^2 = -I,
/// G^T = -G, G^-1 = -G.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GOperator {
    pub a: f64,
    pub b: f64,
}

impl GOperator {
    pub fn new(params: &ProblemParams) -> Self {
        let c = 1.0 / (params.nu * (1.0 + params.nu * params.omega * params.omega)).sqrt();
        GOperator { a: params.omega * params.nu * c, b: params.nu.sqrt() * c }
    }

    /// (a x2 + b x3; -a x1 + b x4; -b x1 - a x4; -b x2 + a x3)
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let m = x.len() / 4;
        debug_assert_eq!(x.len() % 4, 0);
        debug_assert_eq!(x.len(), y.len());
        let (a, b) = (self.a, self.b);
        for i in 0..m {
            let (x1, x2, x3, x4) = (x[i], x[m + i], x[2 * m + i], x[3 * m + i]);
            y[i] = a * x2 + b * x3;
            y[m + i] = -a * x1 + b * x4;
            y[2 * m + i] = -b * x1 - a * x4;
            y[3 * m + i] = -b * x2 + a * x3;
        }
    }

    pub fn apply(&self, x: &BlockVector4) -> BlockVector4 {
        let mut y = BlockVector4::zeros(x.block_size());
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }
}

/// Apply the transform G1 of the block-real derivation:
/// (x1 + w x4; x2 - w x3; -w x2 - x3; w x1 - x4) with w = omega sqrt(nu).
/// G1^T G1 = (1 + nu omega^2) I, so norms scale by sqrt(1 + nu omega^2).
pub fn apply_g1(params: &ProblemParams, x: &[f64], y: &mut [f64]) {
    let m = x.len() / 4;
    let w = params.omega * params.nu.sqrt();
    for i in 0..m {
        let (x1, x2, x3, x4) = (x[i], x[m + i], x[2 * m + i], x[3 * m + i]);
        y[i] = x1 + w * x4;
        y[m + i] = x2 - w * x3;
        y[2 * m + i] = -w * x2 - x3;
        y[3 * m + i] = w * x1 - x4;
    }
}

/// The system operator B = blockdiag(M) + G (eta blockdiag(K)): two sparse
/// mat-vecs per block plus the G recombination.
pub struct BOperator<'a> {
    pub mass: &'a CsrMatrix,
    pub stiffness: &'a CsrMatrix,
    pub params: ProblemParams,
    pub g: GOperator,
}

impl<'a> BOperator<'a> {
    pub fn new(mass: &'a CsrMatrix, stiffness: &'a CsrMatrix, params: ProblemParams) -> Self {
        let g = GOperator::new(&params);
        BOperator { mass, stiffness, params, g }
    }

    pub fn block_size(&self) -> usize {
        self.mass.nrows()
    }

    pub fn apply_block(&self, x: &BlockVector4) -> BlockVector4 {
        let mut y = BlockVector4::zeros(x.block_size());
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }
}

impl LinOp for BOperator<'_> {
    fn dim(&self) -> usize {
        4 * self.mass.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let m = self.mass.nrows();
        let eta = self.params.eta;
        let mut t = vec![0.0; 4 * m];
        for blk in 0..4 {
            let span = blk * m..(blk + 1) * m;
            self.stiffness.spmv_into(&x[span.clone()], &mut t[span]);
        }
        for v in &mut t {
            *v *= eta;
        }
        let mut gt = vec![0.0; 4 * m];
        self.g.apply_into(&t, &mut gt);
        for blk in 0..4 {
            let span = blk * m..(blk + 1) * m;
            self.mass.spmv_into(&x[span.clone()], &mut y[span]);
        }
        for (yi, ti) in y.iter_mut().zip(&gt) {
            *yi += ti;
        }
    }
}

/// The symmetric 4x4 block matrix of the real system, built literally from
/// its blocks (an independent construction from B = G1^-1 A):
/// rows (M x1 + rn K x3 + w M x4; M x2 - w M x3 + rn K x4;
///       rn K x1 - w M x2 - M x3; w M x1 + rn K x2 - M x4)
/// with rn = sqrt(nu), w = omega sqrt(nu).
pub struct A4Operator<'a> {
    pub mass: &'a CsrMatrix,
    pub stiffness: &'a CsrMatrix,
    pub params: ProblemParams,
}

impl<'a> A4Operator<'a> {
    pub fn new(mass: &'a CsrMatrix, stiffness: &'a CsrMatrix, params: ProblemParams) -> Self {
        A4Operator { mass, stiffness, params }
    }

    /// Materialize as CSR (for Matrix Market export and cross-validation).
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        let m = self.mass.nrows();
        let rn = self.params.nu.sqrt();
        let w = self.params.omega * rn;
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut put = |bi: usize, bj: usize, a: &CsrMatrix, scale: f64| {
            if scale == 0.0 {
                return;
            }
            for i in 0..m {
                let (cols, vals) = a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    triplets.push((bi * m + i, bj * m + j, scale * v));
                }
            }
        };
        let (mass, stiff) = (self.mass, self.stiffness);
        put(0, 0, mass, 1.0);
        put(0, 2, stiff, rn);
        put(0, 3, mass, w);
        put(1, 1, mass, 1.0);
        put(1, 2, mass, -w);
        put(1, 3, stiff, rn);
        put(2, 0, stiff, rn);
        put(2, 1, mass, -w);
        put(2, 2, mass, -1.0);
        put(3, 0, mass, w);
        put(3, 1, stiff, rn);
        put(3, 3, mass, -1.0);
        CsrMatrix::from_triplets(4 * m, 4 * m, triplets)
    }
}

impl LinOp for A4Operator<'_> {
    fn dim(&self) -> usize {
        4 * self.mass.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let m = self.mass.nrows();
        let rn = self.params.nu.sqrt();
        let w = self.params.omega * rn;
        let mut mx = vec![0.0; 4 * m];
        let mut kx = vec![0.0; 4 * m];
        for blk in 0..4 {
            let span = blk * m..(blk + 1) * m;
            self.mass.spmv_into(&x[span.clone()], &mut mx[span.clone()]);
            self.stiffness.spmv_into(&x[span.clone()], &mut kx[span]);
        }
        for i in 0..m {
            y[i] = mx[i] + rn * kx[2 * m + i] + w * mx[3 * m + i];
            y[m + i] = mx[m + i] - w * mx[2 * m + i] + rn * kx[3 * m + i];
            y[2 * m + i] = rn * kx[i] - w * mx[m + i] - mx[2 * m + i];
            y[3 * m + i] = w * mx[i] + rn * kx[m + i] - mx[3 * m + i];
        }
    }
}

/// Right-hand side b = G1^-1 (Re yhat; Im yhat; 0; 0):
/// (1/(1+nu omega^2)) (Re yhat + w Im... ) written out blockwise. For the
/// real target used here the imaginary part is zero, giving
/// (c2 yhat; 0; 0; c2 w yhat) with c2 = 1/(1 + nu omega^2), w = omega sqrt(nu).
pub fn build_rhs(yhat_re: &[f64], yhat_im: Option<&[f64]>, params: &ProblemParams) -> BlockVector4 {
    let m = yhat_re.len();
    let c2 = 1.0 / (1.0 + params.nu * params.omega * params.omega);
    let w = params.omega * params.nu.sqrt();
    let mut b = BlockVector4::zeros(m);
    match yhat_im {
        None => {
            for i in 0..m {
                b.block_mut(0)[i] = c2 * yhat_re[i];
                b.block_mut(3)[i] = c2 * w * yhat_re[i];
            }
        }
        Some(im) => {
            assert_eq!(im.len(), m);
            // full G1^-1 (re; im; 0; 0)
            for i in 0..m {
                b.block_mut(0)[i] = c2 * yhat_re[i];
                b.block_mut(1)[i] = c2 * im[i];
                b.block_mut(2)[i] = -c2 * w * im[i];
                b.block_mut(3)[i] = c2 * w * yhat_re[i];
            }
        }
    }
    b
}

/// Monitored residual of the 4x4 real system: ||G1 (b - B x)||_2. The real
/// form is an isometric rewrite of the complex system, so this equals the
/// complex residual norm; since G1^T G1 = (1+nu omega^2) I the relative
/// version agrees with ||b - Bx|| / ||b|| as well.
pub fn residual_main(op: &BOperator<'_>, x: &BlockVector4, b: &BlockVector4) -> f64 {
    let mut bx = vec![0.0; b.len()];
    op.apply_into(x.as_slice(), &mut bx);
    let mut r = vec![0.0; b.len()];
    for i in 0..b.len() {
        r[i] = b.as_slice()[i] - bx[i];
    }
    let mut g1r = vec![0.0; b.len()];
    apply_g1(&op.params, &r, &mut g1r);
    norm2(&g1r)
}

/// Recover the complex state and control: y = x1 + i x2, q = x3 + i x4,
/// p = sqrt(nu) q, u = p / nu = q / sqrt(nu).
pub fn recover_solution(
    x: &BlockVector4,
    params: &ProblemParams,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let m = x.block_size();
    let inv_sqrt_nu = 1.0 / params.nu.sqrt();
    let mut y = Vec::with_capacity(m);
    let mut u = Vec::with_capacity(m);
    for i in 0..m {
        y.push(Complex64::new(x.block(0)[i], x.block(1)[i]));
        u.push(Complex64::new(
            inv_sqrt_nu * x.block(2)[i],
            inv_sqrt_nu * x.block(3)[i],
        ));
    }
    (y, u)
}

/// The PRESB 2x2 real form over (Re; Im) pairs:
/// E = blockdiag(M, M), F = [[rn K, -rn w... ]] with rn = sqrt(nu); the full
/// operator [[E, F^T],[F, -E]] is what the comparison solver runs on.
pub struct PresbForms<'a> {
    pub mass: &'a CsrMatrix,
    pub stiffness: &'a CsrMatrix,
    pub params: ProblemParams,
}

impl<'a> PresbForms<'a> {
    pub fn new(mass: &'a CsrMatrix, stiffness: &'a CsrMatrix, params: ProblemParams) -> Self {
        PresbForms { mass, stiffness, params }
    }

    pub fn block_size(&self) -> usize {
        self.mass.nrows()
    }

    /// E r over a 2m vector.
    pub fn apply_e(&self, x: &[f64], y: &mut [f64]) {
        let m = self.mass.nrows();
        self.mass.spmv_into(&x[..m], &mut y[..m]);
        self.mass.spmv_into(&x[m..], &mut y[m..]);
    }

    /// F r = (rn K r1 - rn w M r2; rn w M r1 + rn K r2); `transpose` flips
    /// the sign of the skew part.
    pub fn apply_f(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        let m = self.mass.nrows();
        let rn = self.params.nu.sqrt();
        let w = self.params.omega * rn;
        let w = if transpose { -w } else { w };
        let mut k1 = vec![0.0; m];
        let mut k2 = vec![0.0; m];
        let mut m1 = vec![0.0; m];
        let mut m2 = vec![0.0; m];
        self.stiffness.spmv_into(&x[..m], &mut k1);
        self.stiffness.spmv_into(&x[m..], &mut k2);
        self.mass.spmv_into(&x[..m], &mut m1);
        self.mass.spmv_into(&x[m..], &mut m2);
        for i in 0..m {
            y[i] = rn * k1[i] - w * m2[i];
            y[m + i] = w * m1[i] + rn * k2[i];
        }
    }

    /// (E + sign F) x, the coefficient operators of the preconditioner's two
    /// inner solves (sign = +1 for E+F, -1 for E+F^T).
    pub fn apply_e_plus_f(&self, x: &[f64], y: &mut [f64], transpose: bool) {
        let m = self.mass.nrows();
        let mut fx = vec![0.0; 2 * m];
        self.apply_f(x, &mut fx, transpose);
        self.apply_e(x, y);
        for (yi, fi) in y.iter_mut().zip(&fx) {
            *yi += fi;
        }
    }

    /// The full 4m operator K4 (r; s) = (E r + F^T s; F r - E s); identical
    /// to the literal 4x4 block form.
    pub fn apply_k4(&self, x: &[f64], y: &mut [f64]) {
        let m = self.mass.nrows();
        let (r, s) = x.split_at(2 * m);
        {
            let (top, bottom) = y.split_at_mut(2 * m);
            let mut fts = vec![0.0; 2 * m];
            self.apply_f(s, &mut fts, true);
            self.apply_e(r, top);
            for (ti, fi) in top.iter_mut().zip(&fts) {
                *ti += fi;
            }
            let mut es = vec![0.0; 2 * m];
            self.apply_e(s, &mut es);
            self.apply_f(r, bottom, false);
            for (bi, ei) in bottom.iter_mut().zip(&es) {
                *bi -= ei;
            }
        }
    }
}

/// Dense assemblies of the block forms, for desk-scale verification and the
/// eigenvalue scatter outputs.
pub mod dense {
    use super::*;

    /// Place `scale * A` at block (bi, bj) of a 4x4 block dense matrix.
    fn put_block(target: &mut DenseMatrix, bi: usize, bj: usize, a: &CsrMatrix, scale: f64) {
        let m = a.nrows();
        for i in 0..m {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                target[(bi * m + i, bj * m + j)] += scale * v;
            }
        }
    }

    /// blockdiag(A, A, A, A) scaled.
    pub fn block_diag4(a: &CsrMatrix, scale: f64) -> DenseMatrix {
        let m = a.nrows();
        let mut d = DenseMatrix::zeros(4 * m, 4 * m);
        for b in 0..4 {
            put_block(&mut d, b, b, a, scale);
        }
        d
    }

    /// Dense G from its closed form: the 4x4 scalar pattern of (a, b)
    /// tensored with the identity.
    pub fn g_matrix(params: &ProblemParams, m: usize) -> DenseMatrix {
        let g = GOperator::new(params);
        let eye = CsrMatrix::identity(m);
        let mut d = DenseMatrix::zeros(4 * m, 4 * m);
        let pattern: [[f64; 4]; 4] = [
            [0.0, g.a, g.b, 0.0],
            [-g.a, 0.0, 0.0, g.b],
            [-g.b, 0.0, 0.0, -g.a],
            [0.0, -g.b, g.a, 0.0],
        ];
        for (bi, row) in pattern.iter().enumerate() {
            for (bj, &s) in row.iter().enumerate() {
                if s != 0.0 {
                    put_block(&mut d, bi, bj, &eye, s);
                }
            }
        }
        d
    }

    /// Dense G1 assembled literally.
    pub fn g1_matrix(params: &ProblemParams, m: usize) -> DenseMatrix {
        let w = params.omega * params.nu.sqrt();
        let eye = CsrMatrix::identity(m);
        let mut d = DenseMatrix::zeros(4 * m, 4 * m);
        let pattern: [[f64; 4]; 4] = [
            [1.0, 0.0, 0.0, w],
            [0.0, 1.0, -w, 0.0],
            [0.0, -w, -1.0, 0.0],
            [w, 0.0, 0.0, -1.0],
        ];
        for (bi, row) in pattern.iter().enumerate() {
            for (bj, &s) in row.iter().enumerate() {
                if s != 0.0 {
                    put_block(&mut d, bi, bj, &eye, s);
                }
            }
        }
        d
    }

    /// Dense closed form of G1^-1 (the derivation's lemma).
    pub fn g1_inv_matrix(params: &ProblemParams, m: usize) -> DenseMatrix {
        let w = params.omega * params.nu.sqrt();
        let c2 = 1.0 / (1.0 + params.nu * params.omega * params.omega);
        let eye = CsrMatrix::identity(m);
        let mut d = DenseMatrix::zeros(4 * m, 4 * m);
        let pattern: [[f64; 4]; 4] = [
            [1.0, 0.0, 0.0, w],
            [0.0, 1.0, -w, 0.0],
            [0.0, -w, -1.0, 0.0],
            [w, 0.0, 0.0, -1.0],
        ];
        for (bi, row) in pattern.iter().enumerate() {
            for (bj, &s) in row.iter().enumerate() {
                if s != 0.0 {
                    put_block(&mut d, bi, bj, &eye, c2 * s);
                }
            }
        }
        d
    }

    /// Dense B = blockdiag(M) + eta G blockdiag(K), assembled literally from
    /// the scalar pattern (no products).
    pub fn b_matrix(mass: &CsrMatrix, stiffness: &CsrMatrix, params: &ProblemParams) -> DenseMatrix {
        let g = GOperator::new(params);
        let eta = params.eta;
        let mut d = block_diag4(mass, 1.0);
        let pattern: [[f64; 4]; 4] = [
            [0.0, g.a, g.b, 0.0],
            [-g.a, 0.0, 0.0, g.b],
            [-g.b, 0.0, 0.0, -g.a],
            [0.0, -g.b, g.a, 0.0],
        ];
        for (bi, row) in pattern.iter().enumerate() {
            for (bj, &s) in row.iter().enumerate() {
                if s != 0.0 {
                    put_block(&mut d, bi, bj, stiffness, eta * s);
                }
            }
        }
        d
    }

    /// Dense literal 4x4 block system matrix (the symmetric real form).
    pub fn a4_matrix(mass: &CsrMatrix, stiffness: &CsrMatrix, params: &ProblemParams) -> DenseMatrix {
        let m = mass.nrows();
        let rn = params.nu.sqrt();
        let w = params.omega * rn;
        let mut d = DenseMatrix::zeros(4 * m, 4 * m);
        put_block(&mut d, 0, 0, mass, 1.0);
        put_block(&mut d, 0, 2, stiffness, rn);
        put_block(&mut d, 0, 3, mass, w);
        put_block(&mut d, 1, 1, mass, 1.0);
        put_block(&mut d, 1, 2, mass, -w);
        put_block(&mut d, 1, 3, stiffness, rn);
        put_block(&mut d, 2, 0, stiffness, rn);
        put_block(&mut d, 2, 1, mass, -w);
        put_block(&mut d, 2, 2, mass, -1.0);
        put_block(&mut d, 3, 0, mass, w);
        put_block(&mut d, 3, 1, stiffness, rn);
        put_block(&mut d, 3, 3, mass, -1.0);
        d
    }
}
