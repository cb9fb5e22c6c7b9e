//! Newton-MR two-metric projection solvers for `min f(x)` subject to `x ≥ 0`.
//!
//! Every iteration splits the coordinates into the δ-active set (near the
//! boundary) and the δ-inactive set (strictly interior). Active coordinates
//! take a projected gradient step; inactive coordinates take a Newton-MR step
//! from MINRES on the inactive principal Hessian block. The combined step is
//! projected back onto the orthant and its length chosen by a projected line
//! search (backtracking for SOL directions, forward/backward tracking for NPC
//! directions).
//!
//! Three outer loops are provided:
//! * [`solve_minimal`]: positive NPC tolerance, fixed MINRES tolerance;
//! * [`solve_improved`]: zero NPC tolerance, MINRES tolerance scaled by `√ε_g`,
//!   and Type I / Type II steps (Type II drops the active part of the step once
//!   the active-set conditions hold);
//! * [`solve_local`]: the local-phase variant with caller-controlled δ,
//!   termination and MINRES tolerance, backtracking only.

mod engine;
pub mod linesearch;
pub mod masked;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minres::DirectionType;
use crate::oracle::{CountedOracle, Objective, OracleCounters};
use crate::orthant::OptimalityMeasures;

pub use engine::{
    solve_improved, solve_local, solve_minimal, LocalConfig, LocalState, LocalTolerance,
};
pub use linesearch::{
    backtracking_ls, forward_backtracking_ls, ls_decrease_bound, LineSearchOutcome,
    LineSearchParams, SearchPoint,
};
pub use masked::{masked_hvp, MaskedHessian};

/// How the NPC tolerance `ς̄` of the minimal-assumptions solver is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NpcScaling {
    /// `ς̄ = (|I| + 1)·ς`, with `|I|` the subproblem dimension.
    #[default]
    Subproblem,
    /// `ς̄ = (d + 1)·ς`.
    FullDimension,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Target tolerance ε_g ∈ (0, 1). Index sets use δ = √ε_g.
    pub eps_g: f64,
    /// Line-search sufficient decrease ρ ∈ (0, ½).
    pub rho: f64,
    /// Backtracking factor ζ ∈ (0, 1).
    pub zeta: f64,
    /// Fixed MINRES inexactness tolerance η.
    pub eta: f64,
    /// When set, the improved-rate solver uses η = θ·√ε_g instead of `eta`.
    pub theta: Option<f64>,
    /// Strong-curvature parameter ς > 0 of the minimal-assumptions solver.
    pub varsigma: f64,
    pub npc_scaling: NpcScaling,
    pub max_outer_iters: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// MINRES iteration cap; `None` means subproblem dimension + 5.
    pub minres_max_iters: Option<usize>,
    /// Lanczos breakdown threshold relative to the subproblem gradient norm.
    pub breakdown_tol: f64,
    /// Keep `x_k` and the search direction of every iteration in the report.
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_g: 1e-8,
            rho: 1e-4,
            zeta: 0.5,
            eta: 1e-2,
            theta: None,
            varsigma: 1e-6,
            npc_scaling: NpcScaling::Subproblem,
            max_outer_iters: 1000,
            alpha_min: 1e-20,
            alpha_max: 1e10,
            minres_max_iters: None,
            breakdown_tol: 1e-13,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: &str| Err(Error::InvalidInput(format!("{field}: {msg}")));
        if !(self.eps_g > 0.0 && self.eps_g < 1.0) {
            return bad("eps_g", "must lie in (0, 1)");
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return bad("rho", "must lie in (0, 0.5)");
        }
        if !(self.zeta > 0.0 && self.zeta < 1.0) {
            return bad("zeta", "must lie in (0, 1)");
        }
        if !(self.eta > 0.0) {
            return bad("eta", "must be > 0");
        }
        if let Some(theta) = self.theta {
            if !(theta > 0.0) {
                return bad("theta", "must be > 0");
            }
        }
        if !(self.varsigma > 0.0) {
            return bad("varsigma", "must be > 0");
        }
        if !(self.alpha_min > 0.0 && self.alpha_min <= 1.0) {
            return bad("alpha_min", "must lie in (0, 1]");
        }
        if !(self.alpha_max >= 1.0) {
            return bad("alpha_max", "must be >= 1");
        }
        if self.minres_max_iters == Some(0) {
            return bad("minres_max_iters", "must be >= 1");
        }
        if !(self.breakdown_tol >= 0.0) {
            return bad("breakdown_tol", "must be >= 0");
        }
        Ok(())
    }

    /// δ_k = ε_k = √ε_g.
    pub fn delta(&self) -> f64 {
        self.eps_g.sqrt()
    }

    pub(crate) fn line_search(&self) -> LineSearchParams {
        LineSearchParams {
            rho: self.rho,
            zeta: self.zeta,
            alpha0: 1.0,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Improved-rate solver: gradient step on A plus Newton-MR step on I.
    TypeI,
    /// Improved-rate solver: Newton-MR step on I only.
    TypeII,
    /// Minimal-assumptions solver combined step.
    MinimalCombined,
    LocalPhase,
    ProjectedGradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    LineSearchStall,
    NumericalFailure,
}

/// Metadata of one accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step_kind: StepKind,
    /// `None` when the inactive set was empty and MINRES was skipped.
    pub dtype: Option<DirectionType>,
    pub alpha: f64,
    pub minres_iters: usize,
    pub p_active_norm: f64,
    pub p_inactive_norm: f64,
}

/// Observables of one outer iteration, measured at `x_k`, together with the
/// step taken from it (absent on the final iteration) and the cumulative
/// oracle counts at the end of the iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub f_value: f64,
    pub norm_g_inactive: f64,
    pub norm_diag_x_g_active: f64,
    pub min_g_active: Option<f64>,
    pub step_kind: Option<StepKind>,
    pub dtype: Option<DirectionType>,
    pub alpha: Option<f64>,
    pub minres_iters: usize,
    pub n_f: u64,
    pub n_g: u64,
    pub n_hvp: u64,
    pub weighted_oracle_total: f64,
}

/// `x_k` and the direction taken from it; kept when `record_iterates` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateSnapshot {
    pub iter: usize,
    pub x: Vec<f64>,
    pub direction: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub status: SolveStatus,
    /// Number of steps taken.
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub steps: Vec<StepRecord>,
    pub iterates: Vec<IterateSnapshot>,
    pub counters: OracleCounters,
    /// Set for `NumericalFailure` / `LineSearchStall`.
    pub message: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Accumulates trace, step and iterate records during a run. Oracle counts
/// are reported relative to the moment the run started.
pub(crate) struct Recorder {
    start: OracleCounters,
    pub(crate) trace: Vec<TraceRecord>,
    pub(crate) steps: Vec<StepRecord>,
    pub(crate) iterates: Vec<IterateSnapshot>,
}

impl Recorder {
    pub(crate) fn new<O: Objective>(oracle: &CountedOracle<O>) -> Self {
        Self {
            start: oracle.counters(),
            trace: Vec::new(),
            steps: Vec::new(),
            iterates: Vec::new(),
        }
    }

    pub(crate) fn push<O: Objective>(
        &mut self,
        oracle: &CountedOracle<O>,
        iter: usize,
        f: f64,
        measures: &OptimalityMeasures,
        step: Option<&StepRecord>,
    ) {
        let c = oracle.counters().since(&self.start);
        self.trace.push(TraceRecord {
            iter,
            f_value: f,
            norm_g_inactive: measures.norm_g_inactive,
            norm_diag_x_g_active: measures.norm_diag_x_g_active,
            min_g_active: measures.min_g_active,
            step_kind: step.map(|s| s.step_kind),
            dtype: step.and_then(|s| s.dtype),
            alpha: step.map(|s| s.alpha),
            minres_iters: step.map_or(0, |s| s.minres_iters),
            n_f: c.n_f,
            n_g: c.n_g,
            n_hvp: c.n_hvp,
            weighted_oracle_total: c.weighted_total(),
        });
    }

    pub(crate) fn finish<O: Objective>(
        self,
        oracle: &CountedOracle<O>,
        x: Vec<f64>,
        f: f64,
        status: SolveStatus,
        message: Option<String>,
    ) -> SolveReport {
        SolveReport {
            x_final: x,
            f_final: f,
            status,
            iterations: self.steps.len(),
            trace: self.trace,
            steps: self.steps,
            iterates: self.iterates,
            counters: oracle.counters().since(&self.start),
            message,
        }
    }
}
