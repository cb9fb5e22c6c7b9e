//! Projected gradient descent with backtracking, the first-order reference
//! method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};
use crate::oracle::{CountedOracle, Objective};
use crate::orthant::{eps_fo_from_gradient, project, IndexPartition};
use crate::solvers::{
    backtracking_ls, IterateSnapshot, LineSearchParams, Recorder, SearchPoint, SolveReport,
    SolveStatus, SolverConfig, StepKind, StepRecord,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PgConfig {
    pub rho: f64,
    pub zeta: f64,
    pub alpha0: f64,
    pub alpha_min: f64,
    pub eps_g: f64,
    pub max_iters: usize,
    pub record_iterates: bool,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            zeta: 0.5,
            alpha0: 1.0,
            alpha_min: 1e-20,
            eps_g: 1e-8,
            max_iters: 1_000_000,
            record_iterates: false,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        SolverConfig {
            eps_g: self.eps_g,
            rho: self.rho,
            zeta: self.zeta,
            alpha_min: self.alpha_min,
            ..Default::default()
        }
        .validate()?;
        if !(self.alpha0 > 0.0 && self.alpha0.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "alpha0: must be > 0, got {}",
                self.alpha0
            )));
        }
        Ok(())
    }
}

/// `x_{k+1} = P(x_k − α_k g_k)`, with `α_k` found by backtracking from
/// `alpha0` against `f(x(α)) − f(x_k) ≤ ρ⟨g_k, P(x_k − α g_k) − x_k⟩`.
/// Stops at an ε_g-approximate first-order point.
pub fn projected_gradient_solve<O: Objective>(
    oracle: &CountedOracle<O>,
    x0: &[f64],
    config: &PgConfig,
) -> Result<SolveReport> {
    config.validate()?;
    let d = oracle.dim();
    if x0.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x0.len(),
        });
    }
    let mut rec = Recorder::new(oracle);
    let mut x = project(x0)?;
    let mut f = oracle.value(&x);
    if !f.is_finite() {
        let msg = Some("non-finite objective at x0".to_string());
        return Ok(rec.finish(oracle, x, f, SolveStatus::NumericalFailure, msg));
    }
    let delta = config.eps_g.sqrt();
    let ls = LineSearchParams {
        rho: config.rho,
        zeta: config.zeta,
        alpha0: config.alpha0,
        alpha_min: config.alpha_min,
        alpha_max: config.alpha0,
    };
    let everything = IndexPartition {
        active: (0..d).collect(),
        inactive: Vec::new(),
        delta: f64::INFINITY,
    };

    for k in 0.. {
        let g = oracle.gradient(&x);
        if !all_finite(&g) {
            let msg = Some(format!("non-finite gradient at iteration {k}"));
            return Ok(rec.finish(oracle, x, f, SolveStatus::NumericalFailure, msg));
        }
        let report = eps_fo_from_gradient(&x, &g, config.eps_g, delta)?;
        if report.satisfied {
            rec.push(oracle, k, f, &report.values, None);
            return Ok(rec.finish(oracle, x, f, SolveStatus::Converged, None));
        }
        if k >= config.max_iters {
            rec.push(oracle, k, f, &report.values, None);
            return Ok(rec.finish(oracle, x, f, SolveStatus::MaxIters, None));
        }
        let p: Vec<f64> = g.iter().map(|v| -v).collect();
        let pt = SearchPoint {
            x: &x,
            f_x: f,
            g: &g,
            p: &p,
            partition: &everything,
        };
        let out = match backtracking_ls(oracle, &pt, &ls) {
            Ok(out) => out,
            Err(e) => {
                rec.push(oracle, k, f, &report.values, None);
                let status = match e {
                    Error::LineSearchStall { .. } => SolveStatus::LineSearchStall,
                    _ => SolveStatus::NumericalFailure,
                };
                return Ok(rec.finish(oracle, x, f, status, Some(e.to_string())));
            }
        };
        let step = StepRecord {
            step_kind: StepKind::ProjectedGradient,
            dtype: None,
            alpha: out.alpha,
            minres_iters: 0,
            p_active_norm: norm(&report.partition.gather_active(&p)),
            p_inactive_norm: norm(&report.partition.gather_inactive(&p)),
        };
        rec.push(oracle, k, f, &report.values, Some(&step));
        rec.steps.push(step);
        if config.record_iterates {
            rec.iterates.push(IterateSnapshot {
                iter: k,
                x: std::mem::take(&mut x),
                direction: Some(p),
            });
        }
        x = out.x_new;
        f = out.f_new;
    }
    unreachable!("loop exits through returns")
}
