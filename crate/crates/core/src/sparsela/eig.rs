//! Dense eigensolvers for desk-scale verification.
//!
//! Symmetric matrices go through cyclic Jacobi sweeps; general real matrices
//! through balancing, Householder reduction to upper Hessenberg form and the
//! Francis double-shift QR iteration (eigenvalues only).

use crate::error::{Error, Result};
use crate::sparsela::dense::DenseMatrix;
use num_complex::Complex64;

/// Full spectrum of a symmetric matrix, ascending. Cyclic Jacobi until the
/// off-diagonal Frobenius norm is below 1e-12 of the matrix norm.
pub fn dense_eig_symmetric(a: &DenseMatrix) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("eig needs a square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.clone();
    let norm_all: f64 = frob(&m);
    if norm_all == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let tol = 1e-12 * norm_all;
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += 2.0 * m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= tol {
            let mut eigs: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
            eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
            return Ok(eigs);
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    Err(Error::Unconverged("Jacobi eigensolver: 100 sweeps exhausted".into()))
}

fn frob(a: &DenseMatrix) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for v in a.row(i) {
            acc += v * v;
        }
    }
    acc.sqrt()
}

/// All eigenvalues of a general real matrix as complex numbers, via
/// balancing, Hessenberg reduction and Francis double-shift QR.
pub fn dense_eig_general(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension("eig needs a square matrix".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    balance(&mut h);
    hessenberg(&mut h);
    francis_qr(&mut h)
}

/// Iterative diagonal scaling by powers of two; a similarity transform, so
/// the spectrum is unchanged while norms of rows and columns equalize.
fn balance(a: &mut DenseMatrix) {
    let n = a.nrows();
    let radix: f64 = 2.0;
    let sqrdx = radix * radix;
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / radix;
                let mut f = 1.0;
                let s = c + r;
                let mut c_acc = c;
                while c_acc < g {
                    f *= radix;
                    c_acc *= sqrdx;
                }
                g = r * radix;
                while c_acc > g {
                    f /= radix;
                    c_acc /= sqrdx;
                }
                if (c_acc + r) / f < 0.95 * s {
                    converged = false;
                    let ginv = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= ginv;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Householder reduction to upper Hessenberg form in place (eigenvalues
/// only; the transform is not accumulated).
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // Householder vector annihilating column k below the subdiagonal
        let mut alpha = 0.0;
        for i in k + 1..n {
            alpha += a[(i, k)] * a[(i, k)];
        }
        if alpha == 0.0 {
            continue;
        }
        let a0 = a[(k + 1, k)];
        let mut beta = alpha.sqrt();
        if a0 > 0.0 {
            beta = -beta;
        }
        let mut v = vec![0.0; n];
        v[k + 1] = a0 - beta;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vtv = v[k + 1..].iter().map(|x| x * x).sum::<f64>();
        if vtv == 0.0 {
            continue;
        }
        let tau = 2.0 / vtv;
        // A := (I - tau v v^T) A
        for j in k..n {
            let mut dotp = 0.0;
            for i in k + 1..n {
                dotp += v[i] * a[(i, j)];
            }
            let w = tau * dotp;
            for i in k + 1..n {
                a[(i, j)] -= w * v[i];
            }
        }
        // A := A (I - tau v v^T)
        for i in 0..n {
            let mut dotp = 0.0;
            for j in k + 1..n {
                dotp += a[(i, j)] * v[j];
            }
            let w = tau * dotp;
            for j in k + 1..n {
                a[(i, j)] -= w * v[j];
            }
        }
        a[(k + 1, k)] = beta;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix. Errors out after
/// 30 n sweeps overall.
fn francis_qr(h: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    let mut eigs = vec![Complex64::new(0.0, 0.0); n];
    let mut t_shift = 0.0;
    let mut total_sweeps = 0usize;
    let budget = 30 * n;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // find the smallest l with a negligible subdiagonal entry
            let mut l = nn;
            while l >= 1 {
                let s_loc = h[(l as usize - 1, l as usize - 1)].abs() + h[(l as usize, l as usize)].abs();
                let s_loc = if s_loc == 0.0 { anorm } else { s_loc };
                if h[(l as usize, l as usize - 1)].abs() <= eps * s_loc {
                    break;
                }
                l -= 1;
            }
            let x = h[(nn as usize, nn as usize)];
            if l == nn {
                eigs[nn as usize] = Complex64::new(x + t_shift, 0.0);
                nn -= 1;
                break;
            }
            let y = h[(nn as usize - 1, nn as usize - 1)];
            let w = h[(nn as usize, nn as usize - 1)] * h[(nn as usize - 1, nn as usize)];
            if l == nn - 1 {
                // 2x2 trailing block: a real or complex-conjugate pair
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let xx = x + t_shift;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    let e1 = xx + z;
                    let e2 = if z != 0.0 { xx - w / z } else { e1 };
                    eigs[nn as usize - 1] = Complex64::new(e1, 0.0);
                    eigs[nn as usize] = Complex64::new(e2, 0.0);
                } else {
                    eigs[nn as usize - 1] = Complex64::new(xx + p, z);
                    eigs[nn as usize] = Complex64::new(xx + p, -z);
                }
                nn -= 2;
                break;
            }
            if total_sweeps >= budget {
                return Err(Error::Unconverged(format!(
                    "Francis QR: no convergence after {budget} sweeps"
                )));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 {
                // exceptional shift
                t_shift += x;
                for i in 0..=nn as usize {
                    h[(i, i)] -= x;
                }
                let s = h[(nn as usize, nn as usize - 1)].abs()
                    + h[(nn as usize - 1, nn as usize - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_sweeps += 1;
            // locate the bulge start: two consecutive small subdiagonals
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0, 0.0, 0.0);
            while m >= l {
                let mu = m as usize;
                let z = h[(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(mu + 1, mu)] + h[(mu, mu + 1)];
                q = h[(mu + 1, mu + 1)] - z - rr - ss;
                r = h[(mu + 2, mu + 1)];
                let s_nrm = p.abs() + q.abs() + r.abs();
                p /= s_nrm;
                q /= s_nrm;
                r /= s_nrm;
                if m == l {
                    break;
                }
                let u = h[(mu, mu - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(mu - 1, mu - 1)].abs() + z.abs() + h[(mu + 1, mu + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                h[(i as usize, i as usize - 2)] = 0.0;
            }
            for i in (m + 3)..=nn {
                h[(i as usize, i as usize - 3)] = 0.0;
            }
            // double QR sweep: chase the bulge from m to nn-1
            for k in m..=nn - 1 {
                let ku = k as usize;
                if k != m {
                    p = h[(ku, ku - 1)];
                    q = h[(ku + 1, ku - 1)];
                    r = if k != nn - 1 { h[(ku + 2, ku - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x == 0.0 {
                        continue;
                    }
                    p /= x;
                    q /= x;
                    r /= x;
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if k == m {
                    if l != m {
                        h[(ku, ku - 1)] = -h[(ku, ku - 1)];
                    }
                } else {
                    h[(ku, ku - 1)] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                // row modification
                for j in ku..=nn as usize {
                    let mut pp = h[(ku, j)] + q * h[(ku + 1, j)];
                    if k != nn - 1 {
                        pp += r * h[(ku + 2, j)];
                        h[(ku + 2, j)] -= pp * z;
                    }
                    h[(ku + 1, j)] -= pp * y;
                    h[(ku, j)] -= pp * x;
                }
                // column modification
                let mmin = if (nn as usize) < ku + 3 { nn as usize } else { ku + 3 };
                for i in l as usize..=mmin {
                    let mut pp = x * h[(i, ku)] + y * h[(i, ku + 1)];
                    if k != nn - 1 {
                        pp += z * h[(i, ku + 2)];
                        h[(i, ku + 2)] -= pp * r;
                    }
                    h[(i, ku + 1)] -= pp * q;
                    h[(i, ku)] -= pp;
                }
            }
        }
    }
    Ok(eigs)
}

/// Spectral radius of a general real matrix.
pub fn spectral_radius(a: &DenseMatrix) -> Result<f64> {
    Ok(dense_eig_general(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
