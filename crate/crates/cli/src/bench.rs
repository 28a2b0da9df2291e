//! Iteration-count sweeps: one row per (method, k, nu, omega) cell, run
//! independently under the experiment protocol (outer 1e-6, inner 1e-4,
//! 500 iterations, zero initial guess, 60 s wall cap).

use asss_core::asss::{alpha_star, asss_solve, iasss_solve, AsssConfig};
use asss_core::blocksys::{build_rhs, A4Operator, BOperator, BlockVector4};
use asss_core::error::{Error, Result};
use asss_core::fem::FemSystem;
use asss_core::precond::{
    fgmres_asss, fgmres_bas, fgmres_bd, fgmres_presb, ibas_solve, bas_iteration_alpha,
    bas_preconditioner_alpha, AsssPreconditioner, BasConfig, BasPreconditioner, BdPreconditioner,
    PresbPreconditioner,
};
use asss_core::report::SolveReport;
use asss_core::{GridConfig, KrylovConfig, ProblemParams};
use serde::Deserialize;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Iasss,
    Ibas,
    PAsss,
    PBas,
    PPresb,
    PBd,
    AsssExact,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Iasss,
        Method::Ibas,
        Method::PAsss,
        Method::PBas,
        Method::PPresb,
        Method::PBd,
        Method::AsssExact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Iasss => "iasss",
            Method::Ibas => "ibas",
            Method::PAsss => "p-asss",
            Method::PBas => "p-bas",
            Method::PPresb => "p-presb",
            Method::PBd => "p-bd",
            Method::AsssExact => "asss-exact",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iasss" => Ok(Method::Iasss),
            "ibas" => Ok(Method::Ibas),
            "p-asss" => Ok(Method::PAsss),
            "p-bas" => Ok(Method::PBas),
            "p-presb" => Ok(Method::PPresb),
            "p-bd" => Ok(Method::PBd),
            "asss-exact" => Ok(Method::AsssExact),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected iasss|ibas|p-asss|p-bas|p-presb|p-bd|asss-exact)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sweep specification; the defaults reproduce the reference protocol at
/// h = 2^-5 over all six methods.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSpec {
    pub k: Vec<u32>,
    pub nu: Vec<f64>,
    pub omega: Vec<f64>,
    pub methods: Vec<String>,
    /// Overrides every method's shift when set.
    pub alpha: Option<f64>,
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_iterations: usize,
    pub ic_droptol: f64,
    /// Wall-clock cap per cell (the double-dagger rule); `None` disables it.
    pub time_cap_secs: Option<f64>,
    pub out: Option<PathBuf>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            k: vec![5],
            nu: vec![1e-2, 1e-4, 1e-6, 1e-8],
            omega: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4],
            methods: Method::ALL[..6].iter().map(|m| m.name().to_string()).collect(),
            alpha: None,
            outer_tol: 1e-6,
            inner_tol: 1e-4,
            max_iterations: 500,
            ic_droptol: 1e-3,
            time_cap_secs: Some(60.0),
            out: None,
        }
    }
}

impl BenchSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bench spec: {e}")))
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        self.methods.iter().map(|s| s.parse()).collect()
    }

    fn outer(&self) -> KrylovConfig {
        // the reference runs do not restart the flexible outer iteration
        KrylovConfig {
            tol_relative: self.outer_tol,
            max_iterations: self.max_iterations,
            restart: self.max_iterations,
        }
    }

    fn inner(&self) -> KrylovConfig {
        KrylovConfig {
            tol_relative: self.inner_tol,
            max_iterations: self.max_iterations,
            restart: self.max_iterations,
        }
    }
}

/// One sweep cell result.
#[derive(Debug, Clone)]
pub struct CellRow {
    pub method: Method,
    pub k: u32,
    pub nu: f64,
    pub omega: f64,
    pub alpha: Option<f64>,
    pub iterations: usize,
    pub status: CellStatus,
    pub seconds: f64,
    pub inner_total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellStatus {
    Converged,
    /// Not converged within the iteration budget.
    DncIterations,
    /// Not converged within the wall-clock cap.
    DncTime,
    Failed(String),
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellStatus::Converged => f.write_str("ok"),
            CellStatus::DncIterations => f.write_str("DNC-ITER"),
            CellStatus::DncTime => f.write_str("DNC-TIME"),
            CellStatus::Failed(msg) => write!(f, "ERR:{}", msg.replace([',', '\n'], ";")),
        }
    }
}

pub const CSV_HEADER: &str = "method,k,nu,omega,alpha,iterations,converged,seconds,inner_total";

impl CellRow {
    pub fn csv_line(&self) -> String {
        let alpha = self.alpha.map(|a| format!("{a:.10e}")).unwrap_or_default();
        format!(
            "{},{},{:e},{:e},{},{},{},{:.3},{}",
            self.method,
            self.k,
            self.nu,
            self.omega,
            alpha,
            self.iterations,
            self.status,
            self.seconds,
            self.inner_total
        )
    }
}

fn status_of(report: &SolveReport) -> CellStatus {
    if report.converged {
        CellStatus::Converged
    } else if report.timed_out {
        CellStatus::DncTime
    } else {
        CellStatus::DncIterations
    }
}

/// Run one cell on a prebuilt system. Alpha defaults follow each method's
/// recommendation: alpha* for the splitting methods, 1 + nu w^2 for the
/// alternating comparison iteration, (1 + nu w^2)/(1 + rn w) for its
/// preconditioner.
pub fn run_cell(
    fem: &FemSystem,
    method: Method,
    nu: f64,
    omega: f64,
    spec: &BenchSpec,
) -> Result<CellRow> {
    let params = ProblemParams::new(nu, omega, fem.grid)?;
    let deadline = spec
        .time_cap_secs
        .map(|cap| Instant::now() + Duration::from_secs_f64(cap));
    let started = Instant::now();
    let astar = alpha_star(&fem.mass)?;
    let alpha = match method {
        Method::Iasss | Method::PAsss | Method::AsssExact => Some(spec.alpha.unwrap_or(astar)),
        Method::Ibas => Some(spec.alpha.unwrap_or_else(|| bas_iteration_alpha(&params))),
        Method::PBas => Some(spec.alpha.unwrap_or_else(|| bas_preconditioner_alpha(&params))),
        Method::PPresb | Method::PBd => None,
    };
    let outcome: Result<SolveReport> = (|| {
        match method {
            Method::Iasss => {
                let op = BOperator::new(&fem.mass, &fem.stiffness, params);
                let b = build_rhs(&fem.target_rhs, None, &params);
                let mut cfg = AsssConfig::inexact(alpha.unwrap());
                cfg.outer = spec.outer();
                cfg.inner = spec.inner();
                cfg.ic_droptol = spec.ic_droptol;
                Ok(iasss_solve(&op, &b, &cfg, deadline)?.1)
            }
            Method::AsssExact => {
                let op = BOperator::new(&fem.mass, &fem.stiffness, params);
                let b = build_rhs(&fem.target_rhs, None, &params);
                let mut cfg = AsssConfig::exact(alpha.unwrap());
                cfg.outer = spec.outer();
                Ok(asss_solve(&op, &b, &cfg, None, deadline)?.1)
            }
            Method::Ibas => {
                let cfg = BasConfig {
                    alpha,
                    outer: spec.outer(),
                    inner: spec.inner(),
                    ic_droptol: spec.ic_droptol,
                };
                Ok(ibas_solve(&fem.mass, &fem.stiffness, &params, &fem.target_rhs, &cfg, deadline)?.1)
            }
            Method::PAsss => {
                let op = BOperator::new(&fem.mass, &fem.stiffness, params);
                let b = build_rhs(&fem.target_rhs, None, &params);
                let pre = AsssPreconditioner::inexact(
                    &fem.mass,
                    &fem.stiffness,
                    &params,
                    alpha.unwrap(),
                    spec.inner(),
                    spec.ic_droptol,
                )?;
                Ok(fgmres_asss(&op, &b, &pre, &spec.outer(), deadline)?.1)
            }
            Method::PBas => {
                let op = A4Operator::new(&fem.mass, &fem.stiffness, params);
                let bhat = real_form_rhs(fem);
                let pre = BasPreconditioner::new(
                    &fem.mass,
                    &fem.stiffness,
                    &params,
                    alpha,
                    spec.inner(),
                    spec.ic_droptol,
                )?;
                Ok(fgmres_bas(&op, &bhat, &pre, &spec.outer(), deadline)?.1)
            }
            Method::PPresb => {
                let bhat = real_form_rhs(fem);
                let pre = PresbPreconditioner::new(
                    &fem.mass,
                    &fem.stiffness,
                    &params,
                    spec.inner(),
                    spec.ic_droptol,
                )?;
                Ok(fgmres_presb(&pre, &bhat, &spec.outer(), deadline)?.1)
            }
            Method::PBd => {
                let op = A4Operator::new(&fem.mass, &fem.stiffness, params);
                let bhat = real_form_rhs(fem);
                let pre = BdPreconditioner::new(
                    &fem.mass,
                    &fem.stiffness,
                    &params,
                    spec.inner(),
                    spec.ic_droptol,
                )?;
                Ok(fgmres_bd(&op, &bhat, &pre, &spec.outer(), deadline)?.1)
            }
        }
    })();
    let seconds = started.elapsed().as_secs_f64();
    let row = match outcome {
        Ok(report) => CellRow {
            method,
            k: fem.grid.k,
            nu,
            omega,
            alpha,
            iterations: report.iterations,
            status: status_of(&report),
            seconds,
            inner_total: report.inner_iterations_total,
        },
        Err(e) => CellRow {
            method,
            k: fem.grid.k,
            nu,
            omega,
            alpha,
            iterations: 0,
            status: CellStatus::Failed(e.to_string()),
            seconds,
            inner_total: 0,
        },
    };
    Ok(row)
}

fn real_form_rhs(fem: &FemSystem) -> BlockVector4 {
    let mut bhat = BlockVector4::zeros(fem.grid.m);
    bhat.block_mut(0).copy_from_slice(&fem.target_rhs);
    bhat
}

/// Run the whole sweep; rows come back in deterministic cell order
/// (k, then method, then nu, then omega) and per-cell errors are recorded
/// in the row, never aborting the sweep.
pub fn run_bench(spec: &BenchSpec) -> Result<Vec<CellRow>> {
    let methods = spec.parsed_methods()?;
    let mut rows = Vec::new();
    for &k in &spec.k {
        let grid = GridConfig::new(k)?;
        let fem = FemSystem::build(grid)?;
        for &method in &methods {
            for &nu in &spec.nu {
                for &omega in &spec.omega {
                    rows.push(run_cell(&fem, method, nu, omega, spec)?);
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[CellRow], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.csv_line())?;
    }
    Ok(())
}
