//! Solve reports: iteration counts, residual history and flags for every
//! solver and preconditioned run.

use crate::error::Result;
use std::io::Write;
use std::path::Path;

/// Outcome of one solver run.
///
/// `relative_residual_history` holds the monitored main-system relative
/// residual, one entry per outer iteration check; with a zero initial guess
/// the first entry is exactly 1.0.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    /// Outer iterations completed when the stopping test first passed
    /// (or the limit at which the run gave up).
    pub iterations: usize,
    pub converged: bool,
    /// The run hit its wall-clock deadline before converging.
    pub timed_out: bool,
    /// GMRES made no residual progress over a full restart cycle.
    pub stagnated: bool,
    pub relative_residual_history: Vec<f64>,
    /// Total inner iterations spent in nested solves (0 for direct inner solves).
    pub inner_iterations_total: usize,
    pub wall_time_secs: f64,
}

impl SolveReport {
    pub fn final_relative_residual(&self) -> f64 {
        self.relative_residual_history.last().copied().unwrap_or(f64::NAN)
    }

    /// Write the residual history as CSV with columns `iter,relres`.
    pub fn write_history_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iter,relres")?;
        for (i, r) in self.relative_residual_history.iter().enumerate() {
            writeln!(f, "{i},{r:.16e}")?;
        }
        Ok(())
    }

    /// Least-squares slope of the log-residual over the last `window` history
    /// entries, exponentiated: the fitted per-iteration contraction factor.
    pub fn fitted_contraction(&self, window: usize) -> Option<f64> {
        let h = &self.relative_residual_history;
        if h.len() < window || window < 2 {
            return None;
        }
        let tail = &h[h.len() - window..];
        if tail.iter().any(|&r| r <= 0.0) {
            return None;
        }
        let n = window as f64;
        let mean_x = (window - 1) as f64 / 2.0;
        let mean_y = tail.iter().map(|r| r.ln()).sum::<f64>() / n;
        let mut sxy = 0.0;
        let mut sxx = 0.0;
        for (i, r) in tail.iter().enumerate() {
            let dx = i as f64 - mean_x;
            sxy += dx * (r.ln() - mean_y);
            sxx += dx * dx;
        }
        Some((sxy / sxx).exp())
    }
}
