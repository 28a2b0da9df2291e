//! Test-local oracles, deliberately independent of the library's own
//! kernels: plain dense matrices as `Vec<Vec<f64>>`, Gaussian elimination,
//! quadrature-based element integrals and a greedy spectrum matcher.
#![allow(dead_code)]

use asss_core::sparsela::csr::CsrMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Dense mirror of a CSR matrix as plain nested vectors.
pub fn to_dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; a.ncols()]; a.nrows()];
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d[i][j] = v;
        }
    }
    d
}

/// Straightforward dense mat-vec, the oracle for the CSR kernel.
pub fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(aij, xj)| aij * xj).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting, the oracle for the sparse
/// factorization solves.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| aug[i][k].abs().partial_cmp(&aug[j][k].abs()).unwrap())
            .unwrap();
        aug.swap(k, piv);
        assert!(aug[k][k] != 0.0, "oracle hit a singular matrix");
        for i in k + 1..n {
            let f = aug[i][k] / aug[k][k];
            for j in k..=n {
                aug[i][j] -= f * aug[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = aug[i][n];
        for j in i + 1..n {
            acc -= aug[i][j] * x[j];
        }
        x[i] = acc / aug[i][i];
    }
    x
}

/// Random SPD matrix A^T A + I with entries from a seeded generator.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, n)).collect();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = if i == j { 1.0 } else { 0.0 };
            for (ka, kb) in a.iter().map(|row| (row[i], row[j])) {
                acc += ka * kb;
            }
            s[i][j] = acc;
        }
    }
    s
}

pub fn dense_to_csr(a: &[Vec<f64>]) -> CsrMatrix {
    let nrows = a.len();
    let ncols = a[0].len();
    let mut t = Vec::new();
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(nrows, ncols, t).unwrap()
}

/// Q1 element matrices by 2x2 Gauss quadrature on an h-by-h cell (the
/// quadrature is exact for these integrands), nodes counterclockwise from
/// the lower-left corner.
pub fn quadrature_element_matrices(h: f64) -> ([[f64; 4]; 4], [[f64; 4]; 4]) {
    let gp = 1.0 / 3.0f64.sqrt();
    let pts = [(-gp, -gp), (gp, -gp), (gp, gp), (-gp, gp)];
    // shape functions on [-1,1]^2 and their reference gradients
    let shape = |xi: f64, et: f64| {
        [
            0.25 * (1.0 - xi) * (1.0 - et),
            0.25 * (1.0 + xi) * (1.0 - et),
            0.25 * (1.0 + xi) * (1.0 + et),
            0.25 * (1.0 - xi) * (1.0 + et),
        ]
    };
    let grad = |xi: f64, et: f64| {
        [
            (-0.25 * (1.0 - et), -0.25 * (1.0 - xi)),
            (0.25 * (1.0 - et), -0.25 * (1.0 + xi)),
            (0.25 * (1.0 + et), 0.25 * (1.0 + xi)),
            (-0.25 * (1.0 + et), 0.25 * (1.0 - xi)),
        ]
    };
    let jac = h / 2.0;
    let mut me = [[0.0; 4]; 4];
    let mut ke = [[0.0; 4]; 4];
    for &(xi, et) in &pts {
        let s = shape(xi, et);
        let g = grad(xi, et);
        for a in 0..4 {
            for b in 0..4 {
                me[a][b] += s[a] * s[b] * jac * jac;
                // physical gradients carry 1/jac each; weights are 1
                ke[a][b] += (g[a].0 * g[b].0 + g[a].1 * g[b].1) / (jac * jac) * jac * jac;
            }
        }
    }
    (me, ke)
}

/// Brute-force element-loop assembly of mass and stiffness on the interior
/// nodes of the uniform unit-square grid (dense accumulation).
pub fn quadrature_assembly(k: u32) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = 1usize << k;
    let h = 1.0 / n as f64;
    let nn = n - 1;
    let m = nn * nn;
    let (me, ke) = quadrature_element_matrices(h);
    let mut mass = vec![vec![0.0; m]; m];
    let mut stiff = vec![vec![0.0; m]; m];
    let interior = |gx: usize, gy: usize| -> Option<usize> {
        if gx >= 1 && gx <= nn && gy >= 1 && gy <= nn {
            Some((gy - 1) * nn + (gx - 1))
        } else {
            None
        }
    };
    for cy in 0..n {
        for cx in 0..n {
            let corners = [(cx, cy), (cx + 1, cy), (cx + 1, cy + 1), (cx, cy + 1)];
            for (a, ca) in corners.iter().enumerate() {
                let Some(i) = interior(ca.0, ca.1) else { continue };
                for (b, cb) in corners.iter().enumerate() {
                    let Some(j) = interior(cb.0, cb.1) else { continue };
                    mass[i][j] += me[a][b];
                    stiff[i][j] += ke[a][b];
                }
            }
        }
    }
    (mass, stiff)
}

/// Greedy nearest-neighbour pairing of two eigenvalue multisets; returns the
/// largest pairing distance. O(n^2), fine at desk scale.
pub fn spectrum_match_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    // pair large-magnitude values first so clustered small ones cannot steal
    // their partners
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().partial_cmp(&a[i].norm()).unwrap());
    for &i in &order {
        let mut best = f64::INFINITY;
        let mut best_j = usize::MAX;
        for (j, bj) in b.iter().enumerate() {
            if !used[j] {
                let d = (a[i] - bj).norm();
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        used[best_j] = true;
        worst = worst.max(best);
    }
    worst
}
