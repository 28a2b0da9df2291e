//! Restarted GMRES and its flexible variant.
//!
//! Arnoldi with modified Gram-Schmidt plus one reorthogonalization pass when
//! the measured orthogonality defect exceeds 1e-8. Right preconditioning, so
//! the monitored quantity is the true residual of A x = b. FGMRES keeps the
//! preconditioned basis and therefore tolerates inexact inner solves.

use crate::error::{Error, Result};
use crate::report::SolveReport;
use crate::sparsela::csr::{dot, norm2};
use crate::sparsela::krylov::{KrylovConfig, LinOp, Precond};
use std::time::Instant;

const REORTH_THRESHOLD: f64 = 1e-8;

struct ArnoldiStep {
    h: Vec<f64>,
    h_next: f64,
}

/// Orthogonalize w against the basis, returning the Hessenberg column. One
/// reorthogonalization pass runs when the measured defect max_i |<v_i, w>|
/// still exceeds 1e-8 ||w|| after the first sweep.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> ArnoldiStep {
    let mut h = vec![0.0; basis.len()];
    for (i, v) in basis.iter().enumerate() {
        let hij = dot(v, w);
        h[i] = hij;
        for (wi, vi) in w.iter_mut().zip(v) {
            *wi -= hij * vi;
        }
    }
    let wnorm = norm2(w);
    let defect = basis.iter().map(|v| dot(v, w).abs()).fold(0.0, f64::max);
    if defect > REORTH_THRESHOLD * wnorm {
        for (i, v) in basis.iter().enumerate() {
            let corr = dot(v, w);
            h[i] += corr;
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= corr * vi;
            }
        }
    }
    let h_next = norm2(w);
    ArnoldiStep { h, h_next }
}

enum PreKind<'a> {
    None,
    Fixed(&'a dyn Precond),
    Flexible(&'a dyn Precond),
}

/// Right-preconditioned restarted GMRES. The preconditioner, when given,
/// must act as a fixed operator.
pub fn gmres(
    a: &dyn LinOp,
    b: &[f64],
    pre: Option<&dyn Precond>,
    cfg: &KrylovConfig,
) -> Result<(Vec<f64>, SolveReport)> {
    let kind = match pre {
        Some(p) => PreKind::Fixed(p),
        None => PreKind::None,
    };
    gmres_driver(a, b, kind, cfg, None)
}

/// Flexible GMRES: the preconditioner may vary between applications (an
/// inexact inner solve), so the preconditioned basis is stored.
pub fn fgmres(
    a: &dyn LinOp,
    b: &[f64],
    pre: &dyn Precond,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(Vec<f64>, SolveReport)> {
    gmres_driver(a, b, PreKind::Flexible(pre), cfg, deadline)
}

fn gmres_driver(
    a: &dyn LinOp,
    b: &[f64],
    pre: PreKind<'_>,
    cfg: &KrylovConfig,
    deadline: Option<Instant>,
) -> Result<(Vec<f64>, SolveReport)> {
    cfg.validate()?;
    if cfg.restart < 1 {
        return Err(Error::Config("restart must be >= 1".into()));
    }
    let start = Instant::now();
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension(format!("gmres: rhs length {} vs dim {n}", b.len())));
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
    report.relative_residual_history.push(1.0);
    let stored = match pre {
        PreKind::Flexible(_) => true,
        PreKind::Fixed(_) | PreKind::None => false,
    };

    let mut total_iters = 0usize;
    loop {
        // residual at (re)start
        let mut r = b.to_vec();
        if total_iters > 0 {
            let ax = a.apply(&x);
            for (ri, ai) in r.iter_mut().zip(&ax) {
                *ri -= ai;
            }
        }
        let beta = norm2(&r);
        let rel_at_restart = beta / norm_b;
        if rel_at_restart <= cfg.tol_relative {
            report.converged = true;
            break;
        }
        let m = cfg.restart.min(cfg.max_iterations - total_iters);
        if m == 0 {
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // preconditioned basis (flexible mode only)
        let mut zs: Vec<Vec<f64>> = Vec::new();
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m); // columns
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0usize;
        let mut happy = false;

        while k < m {
            if let Some(d) = deadline {
                if Instant::now() >= d {
                    report.timed_out = true;
                    break;
                }
            }
            let vk = &basis[k];
            let mut w = vec![0.0; n];
            match pre {
                PreKind::None => a.apply_into(vk, &mut w),
                PreKind::Fixed(p) => {
                    let mut z = vec![0.0; n];
                    report.inner_iterations_total += p.apply_into(vk, &mut z)?;
                    a.apply_into(&z, &mut w);
                }
                PreKind::Flexible(p) => {
                    let mut z = vec![0.0; n];
                    report.inner_iterations_total += p.apply_into(vk, &mut z)?;
                    a.apply_into(&z, &mut w);
                    zs.push(z);
                }
            }
            let step = orthogonalize(&basis, &mut w);
            let mut hcol = step.h;
            let h_next = step.h_next;
            // apply accumulated Givens rotations to the new column
            for i in 0..k {
                let t = cs[i] * hcol[i] + sn[i] * hcol[i + 1];
                hcol[i + 1] = -sn[i] * hcol[i] + cs[i] * hcol[i + 1];
                hcol[i] = t;
            }
            let denom = (hcol[k] * hcol[k] + h_next * h_next).sqrt();
            if denom == 0.0 {
                return Err(Error::Unconverged("gmres: zero Hessenberg column".into()));
            }
            cs[k] = hcol[k] / denom;
            sn[k] = h_next / denom;
            hcol[k] = denom;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            hess.push(hcol);
            let rel = g[k + 1].abs() / norm_b;
            report.relative_residual_history.push(rel);
            total_iters += 1;
            k += 1;
            // happy breakdown: the Krylov space is exhausted and the
            // least-squares residual is exact
            if h_next <= 1e-300 {
                happy = true;
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
            if rel <= cfg.tol_relative {
                break;
            }
        }

        if k > 0 {
            // back-substitute the triangular system and update x
            let mut y = vec![0.0; k];
            for i in (0..k).rev() {
                let mut acc = g[i];
                for j in i + 1..k {
                    acc -= hess[j][i] * y[j];
                }
                y[i] = acc / hess[i][i];
            }
            if stored {
                for (j, yj) in y.iter().enumerate() {
                    for (xi, zi) in x.iter_mut().zip(&zs[j]) {
                        *xi += yj * zi;
                    }
                }
            } else {
                let mut u = vec![0.0; n];
                for (j, yj) in y.iter().enumerate() {
                    for (ui, vi) in u.iter_mut().zip(&basis[j]) {
                        *ui += yj * vi;
                    }
                }
                match pre {
                    PreKind::Fixed(p) => {
                        let mut z = vec![0.0; n];
                        report.inner_iterations_total += p.apply_into(&u, &mut z)?;
                        for (xi, zi) in x.iter_mut().zip(&z) {
                            *xi += zi;
                        }
                    }
                    _ => {
                        for (xi, ui) in x.iter_mut().zip(&u) {
                            *xi += ui;
                        }
                    }
                }
            }
        }
        report.iterations = total_iters;

        let rel_now = g[k].abs() / norm_b;
        if rel_now <= cfg.tol_relative || happy {
            report.converged = true;
            break;
        }
        if report.timed_out || total_iters >= cfg.max_iterations {
            break;
        }
        // stagnation over a full restart cycle: reported, not fatal
        if k == cfg.restart && rel_now >= rel_at_restart {
            report.stagnated = true;
        }
    }
    report.iterations = total_iters;
    // trust the recurrence only up to the final true residual
    let ax = a.apply(&x);
    let true_res = b
        .iter()
        .zip(&ax)
        .map(|(bi, ai)| (bi - ai) * (bi - ai))
        .sum::<f64>()
        .sqrt();
    let rel = true_res / norm_b;
    if let Some(last) = report.relative_residual_history.last_mut() {
        *last = rel;
    }
    report.converged = rel <= cfg.tol_relative;
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok((x, report))
}
