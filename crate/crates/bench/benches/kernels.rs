//! Microbenchmarks of the hot kernels: sparse mat-vec, the incomplete
//! factorization, one alternating sweep and a preconditioned outer solve.
//! Run with `cargo bench -p asss-bench`.

use asss_core::asss::{alpha_star, asss_solve, iasss_solve, AsssConfig};
use asss_core::blocksys::{build_rhs, BOperator};
use asss_core::fem::{FemSystem, GridConfig};
use asss_core::precond::{fgmres_asss, AsssPreconditioner};
use asss_core::sparsela::{dense_eig_general, DenseMatrix, IncompleteCholeskyFactor, KrylovConfig};
use asss_core::ProblemParams;
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn bench_spmv(c: &mut Criterion) {
    let fem = FemSystem::build(GridConfig::new(6).unwrap()).unwrap();
    let x: Vec<f64> = (0..fem.grid.m).map(|i| (i as f64 * 0.1).sin()).collect();
    c.bench_function("spmv_stiffness_k6", |b| {
        b.iter(|| black_box(fem.stiffness.spmv(black_box(&x)).unwrap()))
    });
}

fn bench_ichol(c: &mut Criterion) {
    let fem = FemSystem::build(GridConfig::new(5).unwrap()).unwrap();
    let alpha = alpha_star(&fem.mass).unwrap();
    let shifted = fem.mass.shift_scale(alpha, 1.0).unwrap();
    c.bench_function("ichol_shifted_mass_k5", |b| {
        b.iter(|| black_box(IncompleteCholeskyFactor::factor(black_box(&shifted), 1e-3).unwrap()))
    });
}

fn bench_solvers(c: &mut Criterion) {
    let fem = FemSystem::build(GridConfig::new(5).unwrap()).unwrap();
    let params = ProblemParams::new(1e-2, 1.0, fem.grid).unwrap();
    let op = BOperator::new(&fem.mass, &fem.stiffness, params);
    let rhs = build_rhs(&fem.target_rhs, None, &params);
    let alpha = alpha_star(&fem.mass).unwrap();
    c.bench_function("asss_exact_solve_k5", |b| {
        b.iter(|| {
            let cfg = AsssConfig::exact(alpha);
            black_box(asss_solve(&op, &rhs, &cfg, None, None).unwrap())
        })
    });
    c.bench_function("iasss_solve_k5", |b| {
        b.iter(|| {
            let cfg = AsssConfig::inexact(alpha);
            black_box(iasss_solve(&op, &rhs, &cfg, None).unwrap())
        })
    });
    c.bench_function("fgmres_preconditioned_k5", |b| {
        b.iter(|| {
            let pre = AsssPreconditioner::inexact(
                &fem.mass,
                &fem.stiffness,
                &params,
                alpha,
                KrylovConfig::inner_default(),
                1e-3,
            )
            .unwrap();
            let cfg = KrylovConfig::new(1e-6, 500).with_restart(500);
            black_box(fgmres_asss(&op, &rhs, &pre, &cfg, None).unwrap())
        })
    });
}

fn bench_eig(c: &mut Criterion) {
    let fem = FemSystem::build(GridConfig::new(3).unwrap()).unwrap();
    let params = ProblemParams::new(1e-2, 1e2, fem.grid).unwrap();
    let b = asss_core::blocksys::dense::b_matrix(&fem.mass, &fem.stiffness, &params);
    c.bench_function("dense_eig_general_196", |bch| {
        bch.iter(|| black_box(dense_eig_general(black_box(&b)).unwrap()))
    });
    let mut g = c.benchmark_group("small");
    g.sample_size(20);
    let m = DenseMatrix::from_csr(&fem.mass);
    g.bench_function("dense_eig_symmetric_49", |bch| {
        bch.iter(|| black_box(asss_core::sparsela::dense_eig_symmetric(black_box(&m)).unwrap()))
    });
    g.finish();
}

criterion_group!(kernels, bench_spmv, bench_ichol, bench_solvers, bench_eig);
criterion_main!(kernels);
