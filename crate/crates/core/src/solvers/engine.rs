use crate::error::{Error, Result};
use crate::linalg::{all_finite, norm};
use crate::minres::{minres_solve, DirectionType, MinresConfig};
use crate::oracle::{CountedOracle, Objective};
use crate::orthant::{
    eps_fo_from_gradient, project, EpsFoReport, IndexPartition, OptimalityMeasures,
};

use super::linesearch::{backtracking_ls, forward_backtracking_ls, SearchPoint};
use super::masked::masked_hvp;
use super::{
    IterateSnapshot, NpcScaling, Recorder, SolveReport, SolveStatus, SolverConfig, StepKind,
    StepRecord,
};

/// MINRES inexactness rule for the local-phase solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTolerance {
    Fixed(f64),
    /// `η_k = min(cap, ‖g_I‖)`.
    InactiveGradient {
        cap: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalConfig {
    /// Line-search parameters, iteration caps and MINRES limits. `eps_g`,
    /// `eta`, `theta` and `varsigma` are not used.
    pub base: SolverConfig,
    /// Active-set radius δ.
    pub delta: f64,
    pub tolerance: LocalTolerance,
}

/// What the local-phase termination predicate sees at each iteration.
pub struct LocalState<'a> {
    pub iter: usize,
    pub x: &'a [f64],
    pub f: f64,
    pub gradient: &'a [f64],
    pub partition: &'a IndexPartition,
    pub measures: &'a OptimalityMeasures,
}

enum Mode<'p> {
    Minimal,
    Improved,
    Local {
        delta: f64,
        tolerance: LocalTolerance,
        done: &'p mut dyn FnMut(&LocalState<'_>) -> bool,
    },
}

/// Newton-MR TMP under minimal assumptions: gradient step on the δ-active set,
/// MINRES step with NPC tolerance `ς̄` on the δ-inactive set, until `x` is an
/// ε_g-approximate first-order point.
pub fn solve_minimal<O: Objective>(
    oracle: &CountedOracle<O>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolveReport> {
    run(oracle, x0, config, Mode::Minimal)
}

/// Newton-MR TMP with Type I / Type II steps and MINRES tolerance `θ√ε_g`.
pub fn solve_improved<O: Objective>(
    oracle: &CountedOracle<O>,
    x0: &[f64],
    config: &SolverConfig,
) -> Result<SolveReport> {
    run(oracle, x0, config, Mode::Improved)
}

/// Local-phase Newton-MR TMP: combined step with zero NPC tolerance,
/// backtracking only, caller-supplied δ, MINRES tolerance and termination.
/// `Converged` means the predicate fired.
pub fn solve_local<O, P>(
    oracle: &CountedOracle<O>,
    x0: &[f64],
    config: &LocalConfig,
    mut termination: P,
) -> Result<SolveReport>
where
    O: Objective,
    P: FnMut(&LocalState<'_>) -> bool,
{
    if !(config.delta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "delta must be >= 0, got {}",
            config.delta
        )));
    }
    match config.tolerance {
        LocalTolerance::Fixed(eta) | LocalTolerance::InactiveGradient { cap: eta }
            if !(eta > 0.0) =>
        {
            return Err(Error::InvalidInput(format!(
                "local MINRES tolerance must be > 0, got {eta}"
            )));
        }
        _ => {}
    }
    run(
        oracle,
        x0,
        &config.base,
        Mode::Local {
            delta: config.delta,
            tolerance: config.tolerance,
            done: &mut termination,
        },
    )
}

struct InnerStep {
    dtype: Option<DirectionType>,
    iters: usize,
}

fn run<O: Objective>(
    oracle: &CountedOracle<O>,
    x0: &[f64],
    config: &SolverConfig,
    mut mode: Mode<'_>,
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
    let delta = match &mode {
        Mode::Local { delta, .. } => *delta,
        _ => config.delta(),
    };
    let eps_k = config.delta();
    let ls = config.line_search();

    let finish =
        |rec: Recorder, x, f, status, message| Ok(rec.finish(oracle, x, f, status, message));

    if !f.is_finite() {
        return finish(
            rec,
            x,
            f,
            SolveStatus::NumericalFailure,
            Some("non-finite objective at x0".into()),
        );
    }

    for k in 0.. {
        let g = oracle.gradient(&x);
        if !all_finite(&g) {
            return finish(
                rec,
                x,
                f,
                SolveStatus::NumericalFailure,
                Some(format!("non-finite gradient at iteration {k}")),
            );
        }
        let EpsFoReport {
            satisfied,
            cond_a,
            cond_b,
            cond_c,
            values: measures,
            partition,
        } = eps_fo_from_gradient(&x, &g, config.eps_g, delta)?;

        // Decide between terminating and the kind of step to take.
        let kind = match &mut mode {
            Mode::Minimal => (!satisfied).then_some(StepKind::MinimalCombined),
            Mode::Improved => {
                if !partition.active.is_empty() && !(cond_a && cond_b) {
                    Some(StepKind::TypeI)
                } else if !partition.inactive.is_empty() && !cond_c {
                    Some(StepKind::TypeII)
                } else {
                    None
                }
            }
            Mode::Local { done, .. } => {
                let state = LocalState {
                    iter: k,
                    x: &x,
                    f,
                    gradient: &g,
                    partition: &partition,
                    measures: &measures,
                };
                (!done(&state)).then_some(StepKind::LocalPhase)
            }
        };
        let Some(kind) = kind else {
            rec.push(oracle, k, f, &measures, None);
            return finish(rec, x, f, SolveStatus::Converged, None);
        };
        if k >= config.max_outer_iters {
            rec.push(oracle, k, f, &measures, None);
            return finish(rec, x, f, SolveStatus::MaxIters, None);
        }

        // Assemble the step.
        let mut p = vec![0.0; d];
        if kind != StepKind::TypeII {
            for &i in &partition.active {
                p[i] = -g[i];
            }
        }
        let inner = if partition.inactive.is_empty() {
            InnerStep {
                dtype: None,
                iters: 0,
            }
        } else {
            let g_inactive = partition.gather_inactive(&g);
            let g_inactive_norm = norm(&g_inactive);
            let (eta, vartheta) = match &mode {
                Mode::Minimal => {
                    let dim = match config.npc_scaling {
                        NpcScaling::Subproblem => partition.inactive.len(),
                        NpcScaling::FullDimension => d,
                    };
                    (config.eta, (dim + 1) as f64 * config.varsigma)
                }
                Mode::Improved => (config.theta.map_or(config.eta, |t| t * eps_k), 0.0),
                Mode::Local { tolerance, .. } => {
                    let eta = match *tolerance {
                        LocalTolerance::Fixed(eta) => eta,
                        LocalTolerance::InactiveGradient { cap } => cap.min(g_inactive_norm),
                    };
                    (eta.max(f64::MIN_POSITIVE), 0.0)
                }
            };
            let mcfg = MinresConfig {
                eta,
                vartheta,
                max_iters: config.minres_max_iters,
                breakdown_tol: config.breakdown_tol,
            };
            let op = masked_hvp(oracle, &x, &partition)?;
            let out = match minres_solve(&op, &g_inactive, &mcfg) {
                Ok(out) => out,
                Err(e) => {
                    rec.push(oracle, k, f, &measures, None);
                    return finish(
                        rec,
                        x,
                        f,
                        SolveStatus::NumericalFailure,
                        Some(e.to_string()),
                    );
                }
            };
            // An iterate that hit the cap is still a descent direction as long
            // as the residual shrank; otherwise there is nothing usable.
            if out.dtype == DirectionType::MaxIters && !(out.residual_norm < g_inactive_norm) {
                rec.push(oracle, k, f, &measures, None);
                return finish(
                    rec,
                    x,
                    f,
                    SolveStatus::NumericalFailure,
                    Some(format!(
                        "MINRES made no progress in {} iterations",
                        out.iterations
                    )),
                );
            }
            for (&i, &v) in partition.inactive.iter().zip(&out.direction) {
                p[i] = v;
            }
            InnerStep {
                dtype: Some(out.dtype),
                iters: out.iterations,
            }
        };

        let forward =
            inner.dtype == Some(DirectionType::Npc) && !matches!(mode, Mode::Local { .. });
        let pt = SearchPoint {
            x: &x,
            f_x: f,
            g: &g,
            p: &p,
            partition: &partition,
        };
        let searched = if forward {
            forward_backtracking_ls(oracle, &pt, &ls)
        } else {
            backtracking_ls(oracle, &pt, &ls)
        };
        let out = match searched {
            Ok(out) => out,
            Err(e) => {
                rec.push(oracle, k, f, &measures, None);
                let status = match e {
                    Error::LineSearchStall { .. } => SolveStatus::LineSearchStall,
                    _ => SolveStatus::NumericalFailure,
                };
                return finish(rec, x, f, status, Some(e.to_string()));
            }
        };

        let step = StepRecord {
            step_kind: kind,
            dtype: inner.dtype,
            alpha: out.alpha,
            minres_iters: inner.iters,
            p_active_norm: norm(&partition.gather_active(&p)),
            p_inactive_norm: norm(&partition.gather_inactive(&p)),
        };
        log::trace!(
            "iter {k}: f = {f:.6e}, |g_I| = {:.3e}, {:?}/{:?}, alpha = {:.3e}",
            measures.norm_g_inactive,
            kind,
            inner.dtype,
            out.alpha
        );
        rec.push(oracle, k, f, &measures, Some(&step));
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
