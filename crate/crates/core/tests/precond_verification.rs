//! Verification of the four preconditioners against dense compositions and
//! the spectral claims that justify them.

mod common;

use asss_core::asss::{alpha_star, iteration_matrix_dense};
use asss_core::blocksys::{build_rhs, dense as bdense, BOperator, BlockVector4, ProblemParams, A4Operator};
use asss_core::fem::{assemble_mass, assemble_stiffness, interpolate_target, rhs_hat, GridConfig};
use asss_core::precond::{
    dense_bas_iteration_matrix, dense_c, dense_k4, dense_p_alpha, dense_preconditioned_b,
    dense_q_alpha, fgmres_asss, fgmres_bd, AsssPreconditioner, BdPreconditioner,
    PresbPreconditioner,
};
use asss_core::sparsela::{
    dense_eig_general, spectral_radius, CsrMatrix, KrylovConfig, Precond,
};
use common::*;
use num_complex::Complex64;

fn setup(k: u32, nu: f64, omega: f64) -> (GridConfig, CsrMatrix, CsrMatrix, ProblemParams, Vec<f64>) {
    let grid = GridConfig::new(k).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let params = ProblemParams::new(nu, omega, grid).unwrap();
    let yhat = rhs_hat(&mass, &interpolate_target(&grid)).unwrap();
    (grid, mass, stiffness, params, yhat)
}

#[test]
fn exact_application_inverts_the_dense_preconditioner() {
    let (grid, mass, stiffness, params, _) = setup(3, 1e-4, 10.0);
    let alpha = alpha_star(&mass).unwrap();
    let pre = AsssPreconditioner::exact(&mass, &stiffness, &params, alpha).unwrap();
    let pd = dense_p_alpha(&mass, &stiffness, &params, alpha).unwrap();
    let mut rng = rng(51);
    for _ in 0..4 {
        let r = random_vec(&mut rng, 4 * grid.m);
        let mut s = vec![0.0; 4 * grid.m];
        pre.apply_into(&r, &mut s).unwrap();
        let back = pd.matvec(&s);
        let scale = r.iter().map(|v| v.abs()).fold(1e-300, f64::max);
        for (u, v) in r.iter().zip(&back) {
            assert!((u - v).abs() <= 1e-10 * scale, "{u} vs {v}");
        }
    }
    // zero stays zero
    let mut s = vec![0.0; 4 * grid.m];
    pre.apply_into(&vec![0.0; 4 * grid.m], &mut s).unwrap();
    assert!(s.iter().all(|&v| v == 0.0));
}

#[test]
fn preconditioned_spectrum_is_one_minus_the_iteration_spectrum() {
    let (_, mass, stiffness, params, _) = setup(3, 1e-4, 1.0);
    let alpha = alpha_star(&mass).unwrap();
    let pb = dense_preconditioned_b(&mass, &stiffness, &params, alpha).unwrap();
    let t = iteration_matrix_dense(&mass, &stiffness, &params, alpha).unwrap();
    let s_pb = dense_eig_general(&pb).unwrap();
    let s_t: Vec<Complex64> = dense_eig_general(&t)
        .unwrap()
        .into_iter()
        .map(|z| Complex64::new(1.0, 0.0) - z)
        .collect();
    assert!(spectrum_match_distance(&s_pb, &s_t) <= 1e-8);
}

#[test]
fn splitting_reconstructs_the_system_operator() {
    let (_, mass, stiffness, params, _) = setup(3, 1e-2, 100.0);
    let alpha = alpha_star(&mass).unwrap();
    let p = dense_p_alpha(&mass, &stiffness, &params, alpha).unwrap();
    let q = dense_q_alpha(&mass, &stiffness, &params, alpha).unwrap();
    let b = bdense::b_matrix(&mass, &stiffness, &params);
    let diff = p.add_scaled(-1.0, &q).max_abs_diff(&b);
    assert!(diff <= 1e-10 * b.max_abs(), "P - Q - B = {diff:e}");
}

#[test]
fn preconditioned_eigenvalues_cluster_in_the_unit_disk_about_one() {
    let (_, mass, stiffness, _, _) = setup(3, 1e-2, 1e2);
    let alpha = alpha_star(&mass).unwrap();
    for (nu, omega) in [(1e-2, 1e2), (1e-4, 1.0), (1e-8, 1e4)] {
        let params = ProblemParams::new(nu, omega, GridConfig::new(3).unwrap()).unwrap();
        let pb = dense_preconditioned_b(&mass, &stiffness, &params, alpha).unwrap();
        for z in dense_eig_general(&pb).unwrap() {
            assert!((z - Complex64::new(1.0, 0.0)).norm() <= 1.0 + 1e-8);
            assert!(z.re > 0.0);
        }
    }
}

#[test]
fn flexible_outer_with_exact_inner_needs_no_more_steps_than_inexact() {
    let (_, mass, stiffness, params, yhat) = setup(4, 1e-2, 1.0);
    let alpha = alpha_star(&mass).unwrap();
    let op = BOperator::new(&mass, &stiffness, params);
    let b = build_rhs(&yhat, None, &params);
    let cfg = KrylovConfig::new(1e-6, 500).with_restart(500);
    let exact = AsssPreconditioner::exact(&mass, &stiffness, &params, alpha).unwrap();
    let (_, rep_exact) = fgmres_asss(&op, &b, &exact, &cfg, None).unwrap();
    let inexact = AsssPreconditioner::inexact(
        &mass,
        &stiffness,
        &params,
        alpha,
        KrylovConfig::inner_default(),
        1e-3,
    )
    .unwrap();
    let (_, rep_inexact) = fgmres_asss(&op, &b, &inexact, &cfg, None).unwrap();
    assert!(rep_exact.converged && rep_inexact.converged);
    assert!(
        rep_exact.iterations <= rep_inexact.iterations,
        "exact {} vs inexact {}",
        rep_exact.iterations,
        rep_inexact.iterations
    );
    assert!(rep_inexact.inner_iterations_total > 0);
}

#[test]
fn bas_iteration_matrix_is_contractive_for_small_frequency_products() {
    let (_, mass, stiffness, _, _) = setup(3, 1e-6, 1e-4);
    for (nu, omega) in [(1e-6, 1e-4), (1e-2, 1.0)] {
        let params = ProblemParams::new(nu, omega, GridConfig::new(3).unwrap()).unwrap();
        let alpha = 1.0 + nu * omega * omega;
        let t = dense_bas_iteration_matrix(&mass, &stiffness, &params, alpha).unwrap();
        let rho = spectral_radius(&t).unwrap();
        assert!(rho < 1.0, "nu={nu:e} omega={omega:e}: rho = {rho}");
    }
}

#[test]
fn square_block_preconditioner_composes_against_its_dense_matrix() {
    let (grid, mass, stiffness, params, _) = setup(3, 1e-2, 1.0);
    // near-exact inner solves isolate the two-solve block procedure
    let pre = PresbPreconditioner::new(
        &mass,
        &stiffness,
        &params,
        KrylovConfig::new(1e-12, 4000),
        1e-3,
    )
    .unwrap();
    let cd = dense_c(&mass, &stiffness, &params);
    let mut rng = rng(52);
    let r = random_vec(&mut rng, 4 * grid.m);
    let mut z = vec![0.0; 4 * grid.m];
    pre.apply_into(&r, &mut z).unwrap();
    let back = cd.matvec(&z);
    let scale = r.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    for (u, v) in r.iter().zip(&back) {
        assert!((u - v).abs() <= 1e-8 * scale, "{u} vs {v}");
    }
    // inverse composition: rhs assembled from a known pair comes back
    let target = random_vec(&mut rng, 4 * grid.m);
    let rhs = cd.matvec(&target);
    let mut recovered = vec![0.0; 4 * grid.m];
    pre.apply_into(&rhs, &mut recovered).unwrap();
    let tscale = target.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    for (u, v) in target.iter().zip(&recovered) {
        assert!((u - v).abs() <= 1e-8 * tscale);
    }
}

#[test]
fn square_block_preconditioned_spectrum_lies_in_the_half_to_one_interval() {
    let (_, mass, stiffness, _, _) = setup(3, 1e-2, 1.0);
    for (nu, omega) in [(1e-2, 1.0), (1e-6, 1e-4), (1e-4, 1e2)] {
        let params = ProblemParams::new(nu, omega, GridConfig::new(3).unwrap()).unwrap();
        let c = dense_c(&mass, &stiffness, &params);
        let k4 = dense_k4(&mass, &stiffness, &params);
        let prec = c.solve_matrix(&k4).unwrap();
        for z in dense_eig_general(&prec).unwrap() {
            assert!(z.im.abs() <= 1e-8, "imaginary part {:e}", z.im);
            assert!(z.re >= 0.5 - 1e-8 && z.re <= 1.0 + 1e-8, "re = {}", z.re);
        }
    }
}

#[test]
fn block_diagonal_preconditioner_composes_against_its_dense_block() {
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    // omega = 0, nu = 1: the block is exactly M + K
    let params = ProblemParams::new(1.0, 0.0, grid).unwrap();
    let pre = BdPreconditioner::new(
        &mass,
        &stiffness,
        &params,
        KrylovConfig::new(1e-12, 4000),
        1e-3,
    )
    .unwrap();
    let block = bdense::block_diag4(pre.block_matrix(), 1.0);
    let mut rng = rng(53);
    let r = random_vec(&mut rng, 4 * grid.m);
    let mut z = vec![0.0; 4 * grid.m];
    pre.apply_into(&r, &mut z).unwrap();
    let back = block.matvec(&z);
    let scale = r.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    for (u, v) in r.iter().zip(&back) {
        assert!((u - v).abs() <= 1e-8 * scale);
    }
    // M + K entrywise
    for i in 0..grid.m {
        for j in 0..grid.m {
            let want = mass.get(i, j) + stiffness.get(i, j);
            assert!((pre.block_matrix().get(i, j) - want).abs() <= 1e-14 * want.abs().max(1.0));
        }
    }
    // zero stays zero
    let mut z = vec![0.0; 4 * grid.m];
    pre.apply_into(&vec![0.0; 4 * grid.m], &mut z).unwrap();
    assert!(z.iter().all(|&v| v == 0.0));
}

#[test]
fn block_diagonal_fgmres_converges_on_a_small_grid() {
    let (_, mass, stiffness, params, yhat) = setup(4, 1e-2, 1e-4);
    let a4 = A4Operator::new(&mass, &stiffness, params);
    let mut bhat = BlockVector4::zeros(mass.nrows());
    bhat.block_mut(0).copy_from_slice(&yhat);
    let pre = BdPreconditioner::new(
        &mass,
        &stiffness,
        &params,
        KrylovConfig::inner_default(),
        1e-3,
    )
    .unwrap();
    let cfg = KrylovConfig::new(1e-6, 500).with_restart(500);
    let (_, rep) = fgmres_bd(&a4, &bhat, &pre, &cfg, None).unwrap();
    assert!(rep.converged, "relres {:e}", rep.final_relative_residual());
    assert!(rep.iterations <= 40, "{} iterations", rep.iterations);
}
