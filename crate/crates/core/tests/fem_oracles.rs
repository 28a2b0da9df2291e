//! Assembly verification against quadrature oracles and the analytic
//! spectral facts of the Q1 discretization.

mod common;

use asss_core::asss::alpha_star;
use asss_core::fem::{
    assemble_mass, assemble_mass_periodic, assemble_stiffness, interpolate_target, rhs_hat,
    GridConfig,
};
use asss_core::sparsela::{dense_eig_symmetric, DenseMatrix};
use common::*;

#[test]
fn assembly_matches_quadrature_oracle_entrywise() {
    let k = 3;
    let grid = GridConfig::new(k).unwrap();
    let mass = assemble_mass(&grid);
    let stiffness = assemble_stiffness(&grid);
    let (mass_oracle, stiff_oracle) = quadrature_assembly(k);
    for i in 0..grid.m {
        for j in 0..grid.m {
            assert!(
                (mass.get(i, j) - mass_oracle[i][j]).abs() <= 1e-13 * grid.theta(),
                "mass ({i},{j})"
            );
            assert!(
                (stiffness.get(i, j) - stiff_oracle[i][j]).abs() <= 1e-13,
                "stiffness ({i},{j}): {} vs {}",
                stiffness.get(i, j),
                stiff_oracle[i][j]
            );
        }
    }
}

#[test]
fn diagonally_scaled_mass_spectrum_obeys_the_stencil_bounds() {
    let grid = GridConfig::new(3).unwrap();
    let mass = assemble_mass(&grid);
    let theta = grid.theta();
    let scaled = DenseMatrix::from_csr(&mass).scale(1.0 / theta);
    let spectrum = dense_eig_symmetric(&scaled).unwrap();
    let (lo, hi) = (spectrum[0], *spectrum.last().unwrap());
    assert!(lo >= 0.25 - 1e-12 && hi <= 2.25 + 1e-12, "[{lo}, {hi}]");
    // the finite Dirichlet grid attains the analytic interior extremes
    // (4 -+ 2cos(pi/2^k))^2 / 16, strictly inside [1/4, 9/4]
    let c = (std::f64::consts::PI / 8.0).cos();
    let want_lo = (4.0 - 2.0 * c) * (4.0 - 2.0 * c) / 16.0;
    let want_hi = (4.0 + 2.0 * c) * (4.0 + 2.0 * c) / 16.0;
    assert!((lo - want_lo).abs() <= 1e-10, "{lo} vs {want_lo}");
    assert!((hi - want_hi).abs() <= 1e-10, "{hi} vs {want_hi}");
    // the boundary-free (torus) stencil attains 1/4 and 9/4 exactly
    let torus = assemble_mass_periodic(grid.h, 8);
    let scaled = DenseMatrix::from_csr(&torus).scale(1.0 / theta);
    let spectrum = dense_eig_symmetric(&scaled).unwrap();
    assert!((spectrum[0] - 0.25).abs() <= 1e-12);
    assert!((spectrum.last().unwrap() - 2.25).abs() <= 1e-12);
}

#[test]
fn mass_diagonal_constant_and_alpha_star_closed_form_across_grids() {
    for k in 3..=7u32 {
        let grid = GridConfig::new(k).unwrap();
        let mass = assemble_mass(&grid);
        let theta = grid.theta();
        for d in mass.diagonal() {
            assert!((d - theta).abs() <= 1e-15 * theta, "k={k}");
        }
        let a = alpha_star(&mass).unwrap();
        assert!((a - 0.75 * theta).abs() <= 1e-10 * theta, "k={k}");
        assert!(mass.is_symmetric());
        assert!(assemble_stiffness(&grid).is_symmetric());
    }
}

#[test]
fn weak_rhs_matches_dense_oracle() {
    let grid = GridConfig::new(4).unwrap();
    let mass = assemble_mass(&grid);
    let target = interpolate_target(&grid);
    let got = rhs_hat(&mass, &target).unwrap();
    let want = dense_matvec(&to_dense(&mass), &target);
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-13 * grid.theta());
    }
}

#[test]
fn mass_is_positive_definite_via_cholesky() {
    let grid = GridConfig::new(4).unwrap();
    assert!(asss_core::sparsela::CholeskyFactor::factor(&assemble_mass(&grid)).is_ok());
    assert!(asss_core::sparsela::CholeskyFactor::factor(&assemble_stiffness(&grid)).is_ok());
}
