//! Projected line searches.
//!
//! A trial step size `α` yields the candidate `x(α) = P(x + αp)` and is
//! accepted when
//!
//! ```text
//! f(x(α)) − f(x) ≤ ρ⟨g_A, P(x_A + α p_A) − x_A⟩ + αρ⟨g_I, p_I⟩
//! ```
//!
//! where `A`/`I` are the δ-active/δ-inactive sets at `x` and `g` is the
//! gradient already computed at `x`.

use crate::error::{Error, Result};
use crate::oracle::Objective;
use crate::orthant::IndexPartition;

/// Right-hand side of the acceptance inequality. Uses only the cached gradient.
pub fn ls_decrease_bound(
    g: &[f64],
    x: &[f64],
    partition: &IndexPartition,
    p: &[f64],
    alpha: f64,
    rho: f64,
) -> f64 {
    let active: f64 = partition
        .active
        .iter()
        .map(|&i| g[i] * ((x[i] + alpha * p[i]).max(0.0) - x[i]))
        .sum();
    let inactive: f64 = partition.inactive.iter().map(|&i| g[i] * p[i]).sum();
    rho * active + alpha * rho * inactive
}

/// Current point, its cached value/gradient, the search direction and the
/// index sets that define the acceptance test.
#[derive(Debug, Clone, Copy)]
pub struct SearchPoint<'a> {
    pub x: &'a [f64],
    pub f_x: f64,
    pub g: &'a [f64],
    pub p: &'a [f64],
    pub partition: &'a IndexPartition,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchParams {
    pub rho: f64,
    pub zeta: f64,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl Default for LineSearchParams {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            zeta: 0.5,
            alpha0: 1.0,
            alpha_min: 1e-20,
            alpha_max: 1e10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchOutcome {
    pub alpha: f64,
    pub x_new: Vec<f64>,
    pub f_new: f64,
    /// Function evaluations spent.
    pub trials: usize,
}

struct Trial {
    accepted: bool,
    x_new: Vec<f64>,
    f_new: f64,
}

fn trial<O: Objective + ?Sized>(oracle: &O, pt: &SearchPoint<'_>, alpha: f64, rho: f64) -> Trial {
    let x_new: Vec<f64> =
        pt.x.iter()
            .zip(pt.p)
            .map(|(xi, pi)| (xi + alpha * pi).max(0.0))
            .collect();
    let f_new = oracle.value(&x_new);
    let bound = ls_decrease_bound(pt.g, pt.x, pt.partition, pt.p, alpha, rho);
    Trial {
        accepted: f_new.is_finite() && f_new - pt.f_x <= bound,
        x_new,
        f_new,
    }
}

fn check_params(params: &LineSearchParams) -> Result<()> {
    if !(params.alpha0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "alpha0 must be > 0, got {}",
            params.alpha0
        )));
    }
    if !(params.zeta > 0.0 && params.zeta < 1.0) {
        return Err(Error::InvalidInput(format!(
            "zeta must lie in (0, 1), got {}",
            params.zeta
        )));
    }
    Ok(())
}

fn backtrack_from<O: Objective + ?Sized>(
    oracle: &O,
    pt: &SearchPoint<'_>,
    params: &LineSearchParams,
    mut alpha: f64,
    mut trials: usize,
) -> Result<LineSearchOutcome> {
    loop {
        if alpha < params.alpha_min {
            return Err(Error::LineSearchStall {
                alpha_min: params.alpha_min,
            });
        }
        let t = trial(oracle, pt, alpha, params.rho);
        trials += 1;
        if t.accepted {
            return Ok(LineSearchOutcome {
                alpha,
                x_new: t.x_new,
                f_new: t.f_new,
                trials,
            });
        }
        alpha *= params.zeta;
    }
}

/// First `α ∈ {α₀, ζα₀, ζ²α₀, …}` meeting the acceptance test.
pub fn backtracking_ls<O: Objective + ?Sized>(
    oracle: &O,
    pt: &SearchPoint<'_>,
    params: &LineSearchParams,
) -> Result<LineSearchOutcome> {
    check_params(params)?;
    backtrack_from(oracle, pt, params, params.alpha0, 0)
}

/// Backtracks if `α₀` fails; otherwise grows `α ← α/ζ` while the test keeps
/// passing and `α ≤ alpha_max`, returning the largest passing value tried.
pub fn forward_backtracking_ls<O: Objective + ?Sized>(
    oracle: &O,
    pt: &SearchPoint<'_>,
    params: &LineSearchParams,
) -> Result<LineSearchOutcome> {
    check_params(params)?;
    if params.alpha0 < params.alpha_min {
        return Err(Error::LineSearchStall {
            alpha_min: params.alpha_min,
        });
    }
    let first = trial(oracle, pt, params.alpha0, params.rho);
    if !first.accepted {
        return backtrack_from(oracle, pt, params, params.alpha0 * params.zeta, 1);
    }
    let mut best = LineSearchOutcome {
        alpha: params.alpha0,
        x_new: first.x_new,
        f_new: first.f_new,
        trials: 1,
    };
    loop {
        let next = best.alpha / params.zeta;
        if next > params.alpha_max {
            return Ok(best);
        }
        let t = trial(oracle, pt, next, params.rho);
        best.trials += 1;
        if !t.accepted {
            return Ok(best);
        }
        best.alpha = next;
        best.x_new = t.x_new;
        best.f_new = t.f_new;
    }
}
