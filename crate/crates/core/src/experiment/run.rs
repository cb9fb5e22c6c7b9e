use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::projected_gradient_solve;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::oracle::{CountedOracle, Objective, OracleCounters};
use crate::orthant::eps_fo_from_gradient;
use crate::problems::{
    half_normal_init, l1_reformulate, load_labeled_csv, load_matrix_csv, make_multinomial,
    make_nnmf, make_quadratic, random_nnls, synthetic_classification, synthetic_nnmf, NnmfProblem,
};
use crate::solvers::{
    solve_improved, solve_local, solve_minimal, IterateSnapshot, LocalConfig, LocalTolerance,
    SolveReport, SolveStatus, TraceRecord,
};

use super::config::{
    ClassificationData, MatrixData, ProblemSpec, RunConfig, SolverSpec, TraceFormat,
};
use super::output::{emit_snapshots, emit_trace, snapshot_path};

/// Command-line overrides applied on top of a [`RunConfig`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub trace_format: Option<TraceFormat>,
    /// Also write `x_k` for every traced iteration.
    pub snapshot_x: bool,
    /// Put the trace and summary files in this directory, keeping their names.
    pub output_dir: Option<PathBuf>,
}

/// The summary document written next to the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub problem: String,
    pub solver: String,
    pub dimension: usize,
    pub status: SolveStatus,
    pub iterations: usize,
    pub f_final: f64,
    pub eps_g: f64,
    pub eps_fo_satisfied: bool,
    pub norm_g_inactive: f64,
    pub norm_diag_x_g_active: f64,
    pub min_g_active: Option<f64>,
    pub n_f: u64,
    pub n_g: u64,
    pub n_hvp: u64,
    pub weighted_oracle_total: f64,
    pub wall_time_seconds: f64,
    pub message: Option<String>,
    pub trace_path: PathBuf,
}

impl RunSummary {
    /// 0 when converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.status == SolveStatus::Converged {
            0
        } else {
            2
        }
    }
}

/// The objective described by a problem spec and its starting point.
pub fn build_problem(spec: &ProblemSpec) -> Result<(Box<dyn Objective>, Vec<f64>)> {
    match spec {
        ProblemSpec::Quadratic { a_path, b_path } => {
            let a = load_matrix_csv(a_path)?;
            let b = load_matrix_csv(b_path)?;
            if b.cols() != 1 {
                return Err(Error::Data(format!(
                    "{}: b must have a single column, got {}",
                    b_path.display(),
                    b.cols()
                )));
            }
            let p = make_quadratic(a, b.into_vec())?;
            let d = p.dim();
            Ok((Box::new(p), vec![0.0; d]))
        }
        ProblemSpec::Nnls {
            rows,
            cols,
            condition,
            seed,
        } => {
            let (a, b) = random_nnls(*rows, *cols, *condition, *seed)?;
            Ok((Box::new(make_quadratic(a, b)?), vec![0.0; *cols]))
        }
        ProblemSpec::L1Multinomial {
            data,
            lambda,
            include_bias,
        } => {
            let (features, labels, classes) = match data {
                ClassificationData::Csv { path, classes } => {
                    let (a, labels) = load_labeled_csv(path)?;
                    let c = classes
                        .unwrap_or_else(|| labels.iter().max().map_or(2, |m| (m + 1).max(2)));
                    (a, labels, c)
                }
                ClassificationData::Synthetic {
                    samples,
                    features,
                    classes,
                    seed,
                } => {
                    let (a, l) = synthetic_classification(*samples, *features, *classes, *seed)?;
                    (a, l, *classes)
                }
            };
            let inner = make_multinomial(&features, &labels, classes, *include_bias)?;
            let exempt = inner.bias_mask();
            let p = l1_reformulate(inner, *lambda, &exempt)?;
            let d = p.dim();
            Ok((Box::new(p), vec![0.0; d]))
        }
        ProblemSpec::Nnmf {
            data,
            rank,
            distance,
            tscad,
            init_seed,
        } => {
            let y: Matrix = match data {
                MatrixData::Csv { path } => load_matrix_csv(path)?,
                MatrixData::Synthetic {
                    rows,
                    cols,
                    rank,
                    seed,
                } => synthetic_nnmf(*rows, *cols, *rank, *seed)?,
            };
            let (w0, h0) = half_normal_init(y.rows(), y.cols(), *rank, *init_seed);
            let p = make_nnmf(y, *rank, *distance, *tscad)?;
            Ok((Box::new(p), NnmfProblem::join(&w0, &h0)))
        }
    }
}

fn solve(
    oracle: &CountedOracle<Box<dyn Objective>>,
    x0: &[f64],
    spec: &SolverSpec,
    record_iterates: bool,
) -> Result<SolveReport> {
    match spec {
        SolverSpec::TmpMinimal(c) => {
            let c = crate::solvers::SolverConfig {
                record_iterates: c.record_iterates || record_iterates,
                ..c.clone()
            };
            solve_minimal(oracle, x0, &c)
        }
        SolverSpec::TmpImproved(c) => {
            let c = crate::solvers::SolverConfig {
                record_iterates: c.record_iterates || record_iterates,
                ..c.clone()
            };
            solve_improved(oracle, x0, &c)
        }
        SolverSpec::TmpLocal(l) => {
            let mut base = l.base.clone();
            base.record_iterates |= record_iterates;
            let eps_g = base.eps_g;
            let cfg = LocalConfig {
                delta: l.delta.unwrap_or_else(|| base.delta()),
                tolerance: l.eta_cap.map_or(LocalTolerance::Fixed(base.eta), |cap| {
                    LocalTolerance::InactiveGradient { cap }
                }),
                base,
            };
            solve_local(oracle, x0, &cfg, |s| {
                eps_fo_from_gradient(s.x, s.gradient, eps_g, eps_g.sqrt())
                    .map(|r| r.satisfied)
                    .unwrap_or(false)
            })
        }
        SolverSpec::ProjectedGradient(p) => {
            let mut p = p.clone();
            p.record_iterates |= record_iterates;
            projected_gradient_solve(oracle, x0, &p)
        }
    }
}

/// Trace records for iterations that are multiples of `every`, plus the last.
fn thin<T: Clone>(items: &[T], iter_of: impl Fn(&T) -> usize, every: usize) -> Vec<T> {
    let last = items.len().saturating_sub(1);
    items
        .iter()
        .enumerate()
        .filter(|(k, r)| iter_of(r).is_multiple_of(every) || *k == last)
        .map(|(_, r)| r.clone())
        .collect()
}

/// Builds the problem, runs the solver and writes trace, optional snapshots
/// and summary. Errors are configuration, data or I/O failures; solver
/// outcomes (including non-convergence) are reported in the summary.
pub fn run_experiment(config: &RunConfig, options: &RunOptions) -> Result<RunSummary> {
    config.validate()?;
    let relocate = |p: &PathBuf| match &options.output_dir {
        Some(dir) => dir.join(p.file_name().unwrap_or_default()),
        None => p.clone(),
    };
    let mut trace_path = relocate(&config.output.trace);
    let summary_path = relocate(&config.output.summary);
    let format = options.trace_format.unwrap_or(config.output.format);
    // An overridden format also fixes a conventional extension.
    if options.trace_format.is_some() {
        let ext = trace_path.extension().and_then(|e| e.to_str());
        match (format, ext) {
            (TraceFormat::Csv, Some("jsonl")) => trace_path.set_extension("csv"),
            (TraceFormat::Jsonl, Some("csv")) => trace_path.set_extension("jsonl"),
            _ => true,
        };
    }

    let (objective, x0) = build_problem(&config.problem)?;
    let oracle = CountedOracle::with_weights(objective, config.weights);
    let start = Instant::now();
    let report = solve(&oracle, &x0, &config.solver, options.snapshot_x)?;
    let wall = start.elapsed().as_secs_f64();

    let trace: Vec<TraceRecord> = thin(&report.trace, |r| r.iter, config.trace_every);
    emit_trace(&trace, &trace_path, format)?;
    if options.snapshot_x {
        let mut snaps = report.iterates.clone();
        snaps.push(IterateSnapshot {
            iter: report.iterations,
            x: report.x_final.clone(),
            direction: None,
        });
        let snaps = thin(&snaps, |s| s.iter, config.trace_every);
        emit_snapshots(&snaps, snapshot_path(&trace_path))?;
    }

    // The final check uses the bare objective so it does not perturb the counts.
    let eps_g = config.solver.eps_g();
    let inner = oracle.inner();
    let g = inner.gradient(&report.x_final);
    let check = eps_fo_from_gradient(&report.x_final, &g, eps_g, eps_g.sqrt())?;
    let c: OracleCounters = report.counters;
    let summary = RunSummary {
        problem: config.problem.name().into(),
        solver: config.solver.name().into(),
        dimension: x0.len(),
        status: report.status,
        iterations: report.iterations,
        f_final: report.f_final,
        eps_g,
        eps_fo_satisfied: check.satisfied,
        norm_g_inactive: check.values.norm_g_inactive,
        norm_diag_x_g_active: check.values.norm_diag_x_g_active,
        min_g_active: check.values.min_g_active,
        n_f: c.n_f,
        n_g: c.n_g,
        n_hvp: c.n_hvp,
        weighted_oracle_total: c.weighted_total(),
        wall_time_seconds: wall,
        message: report.message.clone(),
        trace_path: trace_path.clone(),
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    if let Some(dir) = summary_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(&summary_path, text + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", summary_path.display())))?;
    Ok(summary)
}
