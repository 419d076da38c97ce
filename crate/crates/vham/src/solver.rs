//! Successive approximation: iterate u_{k+1} = A(u_k) until the weighted
//! norm of the step drops below tolerance.
//!
//! The stopping rule uses the Bielecki norm, the norm in which the operator
//! contracts, so the residual history decays geometrically at (roughly) the
//! certified factor q.

use crate::error::{Error, Result};
use crate::grid::{axpy, Field3D};
use crate::operator::ProblemInstance;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Stopping tolerance on the weighted step norm.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Outcome of a fixed-point iteration.
///
/// `residual_history[k]` is the weighted norm of step k; `observed_ratios`
/// holds the successive quotients of those steps (skipping exact zeros).
/// Non-convergence is reported through `converged`, not an error.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub u_star: Field3D,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub observed_ratios: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
}

/// Iterate the operator from `u0`. Deterministic given its inputs.
pub fn solve(p: &ProblemInstance, u0: Field3D, opts: &SolveOptions) -> Result<SolveReport> {
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "solver tolerance must be positive (got {})",
            opts.tol
        )));
    }
    if opts.max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }

    let mut u = u0;
    let mut residual_history = Vec::new();
    let mut observed_ratios = Vec::new();
    let mut prev_step: Option<f64> = None;
    let mut converged = false;

    for _ in 0..opts.max_iter {
        let next = p.apply(&u)?;
        let step = axpy(-1.0, &u, &next)?.bielecki_norm();
        residual_history.push(step);
        if let Some(prev) = prev_step {
            if prev > 0.0 {
                observed_ratios.push(step / prev);
            }
        }
        prev_step = Some(step);
        u = next;
        if step <= opts.tol {
            converged = true;
            break;
        }
    }

    Ok(SolveReport {
        u_star: u,
        iterations: residual_history.len(),
        residual_history,
        observed_ratios,
        converged,
        tol: opts.tol,
    })
}

/// Standard a-priori contraction estimate q^k * first_step / (1 - q) for
/// the distance from iterate k to the fixed point.
pub fn a_priori_bound(q: f64, first_step: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::QOutOfRange(q));
    }
    Ok(q.powi(k as i32) * first_step / (1.0 - q))
}
