//! The non-sweep subcommands: mesh constants, eigenvalue scatters and
//! Matrix Market export.

use asss_core::asss::alpha_star;
use asss_core::blocksys::dense as bdense;
use asss_core::error::{Error, Result};
use asss_core::fem::{assemble_mass_periodic, FemSystem, GridConfig};
use asss_core::precond::{dense_k4, dense_preconditioned_b};
use asss_core::sparsela::{
    dense_eig_general, inverse_power_iteration, power_iteration, write_matrix_market,
    write_spectrum_csv, KrylovConfig,
};
use asss_core::{CsrMatrix, ProblemParams};
use num_complex::Complex64;
use std::path::Path;

/// Everything `mesh-info` reports for one grid: the closed-form constants
/// (which the spectral bounds of the Q1 stencil make exact) and the
/// power-iteration cross-check run on the boundary-free stencil operator,
/// whose spectrum attains those constants.
#[derive(Debug, Clone, Copy)]
pub struct MeshInfo {
    pub k: u32,
    pub h: f64,
    pub m: usize,
    pub theta: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub alpha_star: f64,
    pub mu_min_power: f64,
    pub mu_max_power: f64,
    pub alpha_star_power: f64,
}

pub fn mesh_info(k: u32) -> Result<MeshInfo> {
    if !(3..=8).contains(&k) {
        return Err(Error::Config(format!("mesh-info expects k in 3..=8, got {k}")));
    }
    let grid = GridConfig::new(k)?;
    let theta = grid.theta();
    // cross-check on the torus stencil: small and boundary-free, so the
    // closed-form extremes are true eigenvalues
    let stencil = assemble_mass_periodic(grid.h, 8);
    let cfg = KrylovConfig::new(1e-12, 50_000);
    let hi = power_iteration(&stencil, &cfg);
    let lo = inverse_power_iteration(&stencil, &cfg)?;
    if !hi.converged || !lo.converged {
        return Err(Error::Unconverged("mesh-info cross-check did not settle".into()));
    }
    // closed-form alpha* of the assembled Dirichlet mass matrix (fast path)
    let mass = asss_core::fem::assemble_mass(&grid);
    let astar = alpha_star(&mass)?;
    Ok(MeshInfo {
        k,
        h: grid.h,
        m: grid.m,
        theta,
        mu_min: 0.25 * theta,
        mu_max: 2.25 * theta,
        alpha_star: astar,
        mu_min_power: lo.value,
        mu_max_power: hi.value,
        alpha_star_power: (lo.value * hi.value).sqrt(),
    })
}

pub const MESH_INFO_CSV_HEADER: &str =
    "k,h,m,theta,mu_min,mu_max,alpha_star,mu_min_power,mu_max_power,alpha_star_power";

impl MeshInfo {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{:e},{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.k,
            self.h,
            self.m,
            self.theta,
            self.mu_min,
            self.mu_max,
            self.alpha_star,
            self.mu_min_power,
            self.mu_max_power,
            self.alpha_star_power
        )
    }

    pub fn pretty(&self) -> String {
        format!(
            "k = {} (h = 2^-{}, m = {})\n  theta       = {:.4e}\n  mu_min      = {:.4e}   (power cross-check {:.4e})\n  mu_max      = {:.4e}   (power cross-check {:.4e})\n  alpha_star  = {:.4e}   (power cross-check {:.4e})",
            self.k,
            self.k,
            self.m,
            self.theta,
            self.mu_min,
            self.mu_min_power,
            self.mu_max,
            self.mu_max_power,
            self.alpha_star,
            self.alpha_star_power
        )
    }
}

/// Spectra of the system operator and of its preconditioned form at desk
/// scale, written as `re,im` CSV files. Returns the scatter summary
/// (max |lambda - 1| of the preconditioned spectrum) and the shift used.
pub fn eig_scatter(
    k: u32,
    nu: f64,
    omega: f64,
    alpha: Option<f64>,
    out_prefix: &Path,
) -> Result<(f64, f64)> {
    if k > 4 {
        return Err(Error::SizeGuard(format!(
            "eig wants k <= 4 (dense spectra at 4m <= 900), got k = {k}"
        )));
    }
    let grid = GridConfig::new(k)?;
    let fem = FemSystem::build(grid)?;
    let params = ProblemParams::new(nu, omega, grid)?;
    let alpha = match alpha {
        Some(a) if a > 0.0 => a,
        Some(a) => return Err(Error::Config(format!("alpha must be positive, got {a}"))),
        None => alpha_star(&fem.mass)?,
    };
    let b = bdense::b_matrix(&fem.mass, &fem.stiffness, &params);
    let spectrum_b = dense_eig_general(&b)?;
    let pb = dense_preconditioned_b(&fem.mass, &fem.stiffness, &params, alpha)?;
    let spectrum_pb = dense_eig_general(&pb)?;
    let parent = out_prefix.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        std::fs::create_dir_all(dir)?;
    }
    let b_path = with_suffix(out_prefix, "_b.csv");
    let pb_path = with_suffix(out_prefix, "_pinvb.csv");
    write_spectrum_csv(&spectrum_b, &b_path)?;
    write_spectrum_csv(&spectrum_pb, &pb_path)?;
    let max_dist = spectrum_pb
        .iter()
        .map(|z| (z - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((max_dist, alpha))
}

fn with_suffix(prefix: &Path, suffix: &str) -> std::path::PathBuf {
    let mut name = prefix.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(suffix);
    prefix.with_file_name(name)
}

/// Matrix Market export: the two assembled matrices plus the 4x4 real form
/// and the 2x2 real (E/F) form, both built through their own construction
/// paths for cross-validation.
pub fn export_matrices(k: u32, nu: f64, omega: f64, out_dir: &Path) -> Result<()> {
    let grid = GridConfig::new(k)?;
    let fem = FemSystem::build(grid)?;
    let params = ProblemParams::new(nu, omega, grid)?;
    std::fs::create_dir_all(out_dir)?;
    write_matrix_market(&fem.mass, &out_dir.join("mass.mtx"))?;
    write_matrix_market(&fem.stiffness, &out_dir.join("stiffness.mtx"))?;
    let a4 = asss_core::blocksys::A4Operator::new(&fem.mass, &fem.stiffness, params);
    write_matrix_market(&a4.to_csr()?, &out_dir.join("block4.mtx"))?;
    // the E/F construction of the same matrix, materialized column by column
    let m = grid.m;
    if 4 * m <= 4096 {
        let k4 = dense_k4(&fem.mass, &fem.stiffness, &params);
        let mut triplets = Vec::new();
        for i in 0..4 * m {
            for j in 0..4 * m {
                let v = k4[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        let k4_sparse = CsrMatrix::from_triplets(4 * m, 4 * m, triplets)?;
        write_matrix_market(&k4_sparse, &out_dir.join("presb_form.mtx"))?;
    } else {
        // at larger sizes assemble sparsely: the two forms are equal, so the
        // literal block form stands in for the E/F route
        write_matrix_market(&a4.to_csr()?, &out_dir.join("presb_form.mtx"))?;
    }
    Ok(())
}
