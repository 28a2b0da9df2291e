//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (visible with `cargo test --test acceptance -- --nocapture`).
//! Tolerances are pinned in code; reference numbers are the published
//! constants and iteration counts for this discretization.

use asss_cli::bench::{run_cell, BenchSpec, CellStatus, Method};
use asss_core::asss::{
    alpha_star, asss_solve, gamma_bound, iasss_solve, iteration_matrix_dense, AsssConfig,
};
use asss_core::blocksys::{build_rhs, BOperator, GOperator, ProblemParams};
use asss_core::fem::{assemble_mass, assemble_stiffness, FemSystem, GridConfig};
use asss_core::precond::{dense_c, dense_k4, dense_p_alpha, dense_preconditioned_b, dense_q_alpha};
use asss_core::sparsela::{
    cg, dense_eig_general, dense_eig_symmetric, global_cg, spectral_radius, CsrMatrix,
    DenseMatrix, KrylovConfig, MultiVector,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::Command;
use std::time::Instant;

struct Criterion {
    number: u32,
    label: &'static str,
}

impl Criterion {
    fn new(number: u32, label: &'static str) -> Self {
        Criterion { number, label }
    }

    /// Silent when the condition holds; prints the FAIL line and panics
    /// otherwise, so each criterion emits exactly one line.
    fn require(&self, ok: bool, detail: &str) {
        if !ok {
            println!("acceptance {:02} ({}): FAIL - {detail}", self.number, self.label);
            panic!("acceptance criterion {} failed: {detail}", self.number);
        }
    }

    fn pass(&self) {
        println!("acceptance {:02} ({}): PASS", self.number, self.label);
    }
}

fn greedy_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[j].norm().partial_cmp(&a[i].norm()).unwrap());
    let mut worst = 0.0f64;
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

fn dense_extremes(a: &CsrMatrix) -> (f64, f64) {
    let s = dense_eig_symmetric(&DenseMatrix::from_csr(a)).unwrap();
    (s[0], *s.last().unwrap())
}

/// Reference mesh constants (theta, mu_min, mu_max, alpha*) for k = 4..7.
const MESH_REFERENCE: [(u32, [f64; 4]); 4] = [
    (4, [1.7361e-3, 4.3403e-4, 3.9063e-3, 1.3021e-3]),
    (5, [4.3403e-4, 1.0851e-4, 9.7656e-4, 3.2552e-4]),
    (6, [1.0851e-4, 2.7127e-5, 2.4414e-4, 8.1380e-5]),
    (7, [2.7127e-5, 6.7817e-6, 6.1035e-5, 2.0345e-5]),
];

#[test]
fn acceptance_01_mesh_constants_match_reference_table() {
    let criterion = Criterion::new(1, "mesh constants and power cross-check");
    let started = Instant::now();
    for (k, want) in MESH_REFERENCE {
        let output = Command::new(env!("CARGO_BIN_EXE_asss"))
            .args(["mesh-info", "--k", &k.to_string(), "--csv"])
            .output()
            .expect("mesh-info run");
        criterion.require(output.status.success(), &format!("mesh-info --k {k} exited nonzero"));
        let text = String::from_utf8_lossy(&output.stdout);
        let row = text.lines().nth(1).expect("csv row");
        let fields: Vec<f64> = row
            .split(',')
            .skip(3)
            .map(|t| t.parse().expect("numeric field"))
            .collect();
        let (theta, mu_min, mu_max, astar) = (fields[0], fields[1], fields[2], fields[3]);
        let (p_min, p_max, p_astar) = (fields[4], fields[5], fields[6]);
        for (got, reference) in [theta, mu_min, mu_max, astar].iter().zip(&want) {
            criterion.require(
                (got / reference - 1.0).abs() <= 5e-5,
                &format!("k={k}: value {got:.6e} vs reference {reference:.6e}"),
            );
        }
        for (power, closed) in [(p_min, mu_min), (p_max, mu_max), (p_astar, astar)] {
            criterion.require(
                (power / closed - 1.0).abs() <= 1e-6,
                &format!("k={k}: power cross-check {power:.8e} vs closed form {closed:.8e}"),
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    criterion.require(elapsed < 5.0, &format!("runtime {elapsed:.1}s exceeds 5s"));
    criterion.pass();
}

#[test]
fn acceptance_02_contraction_bound_holds_across_the_parameter_grid() {
    let criterion = Criterion::new(2, "spectral radius below the bound on a 5x5x3 grid");
    let started = Instant::now();
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let astar = alpha_star(&mass).unwrap();
    let (mu_lo, mu_hi) = dense_extremes(&mass);
    let (la_lo, la_hi) = dense_extremes(&stiffness);
    let nus: Vec<f64> = (0..5).map(|i| 10f64.powf(-8.0 + 1.5 * i as f64)).collect();
    let omegas: Vec<f64> = (0..5).map(|i| 10f64.powf(-4.0 + 2.0 * i as f64)).collect();
    for &nu in &nus {
        for &omega in &omegas {
            let params = ProblemParams::new(nu, omega, grid).unwrap();
            for alpha in [astar / 10.0, astar, 10.0 * astar] {
                let t = iteration_matrix_dense(&mass, &stiffness, &params, alpha).unwrap();
                let rho = spectral_radius(&t).unwrap();
                let gamma = gamma_bound(
                    alpha,
                    (mu_lo, mu_hi),
                    (params.eta * la_lo, params.eta * la_hi),
                );
                criterion.require(
                    rho < 1.0,
                    &format!("nu={nu:e} omega={omega:e} alpha={alpha:e}: rho={rho}"),
                );
                criterion.require(
                    rho <= gamma + 1e-10,
                    &format!("nu={nu:e} omega={omega:e} alpha={alpha:e}: rho={rho} > gamma={gamma}"),
                );
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    criterion.require(elapsed < 120.0, &format!("runtime {elapsed:.1}s exceeds 2min"));
    criterion.pass();
}

#[test]
fn acceptance_03_preconditioner_identities() {
    let criterion = Criterion::new(3, "P^-1 B = I - T on spectra and B = P - Q");
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let astar = alpha_star(&mass).unwrap();
    for (nu, omega) in [(1e-4, 1.0), (1e-2, 1e2)] {
        let params = ProblemParams::new(nu, omega, grid).unwrap();
        let pb = dense_preconditioned_b(&mass, &stiffness, &params, astar).unwrap();
        let t = iteration_matrix_dense(&mass, &stiffness, &params, astar).unwrap();
        let s_pb = dense_eig_general(&pb).unwrap();
        let s_it: Vec<Complex64> = dense_eig_general(&t)
            .unwrap()
            .into_iter()
            .map(|z| Complex64::new(1.0, 0.0) - z)
            .collect();
        let dist = greedy_match(&s_pb, &s_it);
        criterion.require(
            dist <= 1e-8,
            &format!("nu={nu:e} omega={omega:e}: spectra differ by {dist:e}"),
        );
        let p = dense_p_alpha(&mass, &stiffness, &params, astar).unwrap();
        let q = dense_q_alpha(&mass, &stiffness, &params, astar).unwrap();
        let b = asss_core::blocksys::dense::b_matrix(&mass, &stiffness, &params);
        let defect = p.add_scaled(-1.0, &q).max_abs_diff(&b);
        criterion.require(
            defect <= 1e-10,
            &format!("nu={nu:e} omega={omega:e}: |P - Q - B| = {defect:e}"),
        );
    }
    criterion.pass();
}

#[test]
fn acceptance_04_preconditioned_spectrum_clusters_in_the_unit_disk() {
    let criterion = Criterion::new(4, "eigenvalue clustering |z-1| <= 1 with positive real part");
    let started = Instant::now();
    let grid = GridConfig::new(4).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let astar = alpha_star(&mass).unwrap();
    for (nu, omega) in [(1e-2, 1e2), (1e-4, 1.0), (1e-8, 1e4)] {
        let params = ProblemParams::new(nu, omega, grid).unwrap();
        let pb = dense_preconditioned_b(&mass, &stiffness, &params, astar).unwrap();
        for z in dense_eig_general(&pb).unwrap() {
            let dist = (z - Complex64::new(1.0, 0.0)).norm();
            criterion.require(
                dist <= 1.0 + 1e-8 && z.re > 0.0,
                &format!("nu={nu:e} omega={omega:e}: eigenvalue {z} (|z-1| = {dist})"),
            );
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    criterion.require(elapsed < 180.0, &format!("runtime {elapsed:.1}s exceeds 3min"));
    criterion.pass();
}

/// Reference iteration counts at h = 2^-5; rows nu in {1e-2,1e-4,1e-6,1e-8},
/// columns omega in {1e-4,...,1e4} by decades.
const IASSS_REFERENCE: [[usize; 9]; 4] = [
    [54, 54, 54, 54, 54, 53, 45, 40, 51],
    [45, 45, 45, 45, 45, 45, 43, 40, 51],
    [40, 40, 40, 40, 40, 40, 40, 42, 51],
    [51, 51, 51, 51, 51, 51, 51, 51, 52],
];
const PASSS_REFERENCE_SMALL_NU: [[usize; 9]; 2] = [
    [21, 21, 21, 21, 21, 21, 21, 21, 20],
    [20, 20, 20, 20, 20, 20, 20, 20, 19],
];
const NUS: [f64; 4] = [1e-2, 1e-4, 1e-6, 1e-8];
const OMEGAS: [f64; 9] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4];

fn count_tolerance(reference: usize) -> usize {
    ((reference as f64 * 0.2).ceil() as usize).max(5)
}

#[test]
fn acceptance_05_iteration_counts_match_the_reference_tables() {
    let criterion = Criterion::new(5, "iteration counts at h=2^-5 within max(20%, 5)");
    let fem = FemSystem::build(GridConfig::new(5).unwrap()).unwrap();
    let spec = BenchSpec::default();
    for (row, &nu) in NUS.iter().enumerate() {
        for (col, &omega) in OMEGAS.iter().enumerate() {
            let cell = run_cell(&fem, Method::Iasss, nu, omega, &spec).unwrap();
            let reference = IASSS_REFERENCE[row][col];
            let tol = count_tolerance(reference);
            criterion.require(
                cell.status == CellStatus::Converged,
                &format!("IASSS nu={nu:e} omega={omega:e}: {}", cell.status),
            );
            criterion.require(
                cell.iterations.abs_diff(reference) <= tol,
                &format!(
                    "IASSS nu={nu:e} omega={omega:e}: {} vs reference {reference}",
                    cell.iterations
                ),
            );
            criterion.require(
                cell.iterations <= 65,
                &format!("IASSS nu={nu:e} omega={omega:e}: {} > 65", cell.iterations),
            );
        }
    }
    for (row, &nu) in [1e-6, 1e-8].iter().enumerate() {
        for (col, &omega) in OMEGAS.iter().enumerate() {
            let cell = run_cell(&fem, Method::PAsss, nu, omega, &spec).unwrap();
            let reference = PASSS_REFERENCE_SMALL_NU[row][col];
            let tol = count_tolerance(reference);
            criterion.require(
                cell.status == CellStatus::Converged
                    && cell.iterations.abs_diff(reference) <= tol,
                &format!(
                    "P-ASSS nu={nu:e} omega={omega:e}: {} ({}) vs reference {reference}",
                    cell.iterations, cell.status
                ),
            );
        }
    }
    criterion.pass();
}

#[test]
fn acceptance_06_alternating_comparison_fails_where_reported() {
    let criterion = Criterion::new(6, "comparison iteration: two reported failures, one count");
    let fem = FemSystem::build(GridConfig::new(5).unwrap()).unwrap();
    // generous wall cap: these cells are about iteration budgets, not time
    let spec = BenchSpec { time_cap_secs: Some(600.0), ..BenchSpec::default() };
    for (nu, omega) in [(1e-2, 1e3), (1e-4, 1e3)] {
        let cell = run_cell(&fem, Method::Ibas, nu, omega, &spec).unwrap();
        criterion.require(
            cell.status == CellStatus::DncIterations,
            &format!("nu={nu:e} omega={omega:e}: expected DNC-ITER, got {}", cell.status),
        );
    }
    let cell = run_cell(&fem, Method::Ibas, 1e-6, 1e-4, &spec).unwrap();
    let within = (cell.iterations as f64 - 33.0).abs() <= 0.2 * 33.0;
    criterion.require(
        cell.status == CellStatus::Converged && within,
        &format!("nu=1e-6 omega=1e-4: {} ({}) vs reference 33 +-20%", cell.iterations, cell.status),
    );
    criterion.pass();
}

#[test]
fn acceptance_07_square_block_preconditioned_spectrum_interval() {
    let criterion = Criterion::new(7, "square-block preconditioned spectrum in [1/2, 1]");
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    for (nu, omega) in [(1e-2, 1.0), (1e-6, 1e-4), (1e-4, 1e2)] {
        let params = ProblemParams::new(nu, omega, grid).unwrap();
        let c = dense_c(&mass, &stiffness, &params);
        let k4 = dense_k4(&mass, &stiffness, &params);
        let prec = c.solve_matrix(&k4).unwrap();
        for z in dense_eig_general(&prec).unwrap() {
            criterion.require(
                z.im.abs() <= 1e-8 && z.re >= 0.5 - 1e-8 && z.re <= 1.0 + 1e-8,
                &format!("nu={nu:e} omega={omega:e}: eigenvalue {z}"),
            );
        }
    }
    criterion.pass();
}

#[test]
fn acceptance_08_algorithmic_equivalences() {
    let criterion = Criterion::new(8, "block/vector CG, inexact/exact and G-algebra equivalences");
    // single-column block CG tracks CG iterate for iterate
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 40;
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, 4.0 + (i % 3) as f64));
        if i + 1 < n {
            triplets.push((i, i + 1, -1.0));
            triplets.push((i + 1, i, -1.0));
        }
    }
    let a = CsrMatrix::from_triplets(n, n, triplets).unwrap();
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bmv = MultiVector::from_columns(&[&b]);
    for maxit in 1..=12 {
        let cfg = KrylovConfig::new(1e-14, maxit);
        let (x1, _) = cg(&a, &b, None, &cfg).unwrap();
        let (x2, _) = global_cg(&a, &bmv, None, &cfg, None).unwrap();
        let diff = x1
            .iter()
            .zip(x2.col(0))
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        criterion.require(diff <= 1e-13, &format!("CG iterates diverged by {diff:e} at {maxit}"));
    }
    // inexact iteration with a tight inner tolerance matches exact mode
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let params = ProblemParams::new(1e-2, 1.0, grid).unwrap();
    let op = BOperator::new(&mass, &stiffness, params);
    let fem = FemSystem::build(grid).unwrap();
    let rhs = build_rhs(&fem.target_rhs, None, &params);
    let astar = alpha_star(&mass).unwrap();
    let (x_exact, rep_exact) = asss_solve(&op, &rhs, &AsssConfig::exact(astar), None, None).unwrap();
    let mut inexact = AsssConfig::inexact(astar);
    inexact.inner = KrylovConfig::new(1e-14, 10_000);
    let (x_inexact, rep_inexact) = iasss_solve(&op, &rhs, &inexact, None).unwrap();
    let scale = x_exact.norm();
    let diff: f64 = x_exact
        .as_slice()
        .iter()
        .zip(x_inexact.as_slice())
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt();
    criterion.require(
        rep_exact.iterations == rep_inexact.iterations && diff <= 1e-8 * scale,
        &format!(
            "inexact ({} sweeps) vs exact ({} sweeps), difference {diff:e}",
            rep_inexact.iterations, rep_exact.iterations
        ),
    );
    // G algebra on 100 random vectors per grid
    for k in [3u32, 4, 5] {
        let grid = GridConfig::new(k).unwrap();
        let mass = assemble_mass(&grid);
        let params = ProblemParams::new(1e-3, 12.5, grid).unwrap();
        let g = GOperator::new(&params);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + k as u64);
        for _ in 0..100 {
            let x: Vec<f64> = (0..4 * grid.m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut gx = vec![0.0; 4 * grid.m];
            g.apply_into(&x, &mut gx);
            let mut ggx = vec![0.0; 4 * grid.m];
            g.apply_into(&gx, &mut ggx);
            let inv_defect = ggx
                .iter()
                .zip(&x)
                .map(|(u, v)| (u + v) * (u + v))
                .sum::<f64>()
                .sqrt();
            criterion.require(inv_defect <= 1e-13 * nx, &format!("k={k}: G^2 defect {inv_defect:e}"));
            let skew: f64 = x.iter().zip(&gx).map(|(u, v)| u * v).sum();
            criterion.require(skew.abs() <= 1e-13 * nx * nx, &format!("k={k}: skew defect {skew:e}"));
            let mut mx = vec![0.0; 4 * grid.m];
            for blk in 0..4 {
                let span = blk * grid.m..(blk + 1) * grid.m;
                mass.spmv_into(&x[span.clone()], &mut mx[span]);
            }
            let mut gmx = vec![0.0; 4 * grid.m];
            g.apply_into(&mx, &mut gmx);
            let mut mgx = vec![0.0; 4 * grid.m];
            for blk in 0..4 {
                let span = blk * grid.m..(blk + 1) * grid.m;
                mass.spmv_into(&gx[span.clone()], &mut mgx[span]);
            }
            let comm: f64 = gmx
                .iter()
                .zip(&mgx)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt();
            criterion.require(comm <= 1e-13 * nx, &format!("k={k}: commutation defect {comm:e}"));
        }
    }
    criterion.pass();
}

#[test]
fn acceptance_09_geometric_rate_audit() {
    let criterion = Criterion::new(9, "fitted contraction at the optimal shift below gamma + 0.02");
    let grid = GridConfig::new(4).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let params = ProblemParams::new(1e-2, 1.0, grid).unwrap();
    let fem = FemSystem::build(grid).unwrap();
    let rhs = build_rhs(&fem.target_rhs, None, &params);
    let op = BOperator::new(&mass, &stiffness, params);
    let astar = alpha_star(&mass).unwrap();
    let (_, report) = asss_solve(&op, &rhs, &AsssConfig::exact(astar), None, None).unwrap();
    criterion.require(report.converged, "exact iteration did not converge");
    let contraction = report.fitted_contraction(10).unwrap();
    let theta = grid.theta();
    let (la_lo, la_hi) = dense_extremes(&stiffness);
    let gamma = gamma_bound(
        astar,
        (0.25 * theta, 2.25 * theta),
        (params.eta * la_lo, params.eta * la_hi),
    );
    criterion.require(
        contraction <= gamma + 0.02,
        &format!("fitted contraction {contraction:.5} vs gamma {gamma:.5} + 0.02"),
    );
    criterion.pass();
}
