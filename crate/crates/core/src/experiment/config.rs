use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::PgConfig;
use crate::error::{Error, Result};
use crate::oracle::OracleWeights;
use crate::problems::{Distance, Tscad};
use crate::solvers::SolverConfig;

/// One experiment: a problem, a solver and where to write the results.
///
/// Relative paths (data files and outputs) are resolved against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Write every `trace_every`-th iteration to the trace (the last one is
    /// always written).
    #[serde(default = "default_trace_every")]
    pub trace_every: usize,
    #[serde(default)]
    pub weights: OracleWeights,
}

fn default_trace_every() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_condition() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `½‖Ax − b‖²` with `A` and `b` read from CSV (b: one value per row).
    Quadratic { a_path: PathBuf, b_path: PathBuf },
    /// Random nonnegative least squares with a prescribed condition number of `AᵀA`.
    Nnls {
        rows: usize,
        cols: usize,
        #[serde(default = "default_condition")]
        condition: f64,
        seed: u64,
    },
    /// ℓ1-regularized multinomial regression in its smooth reformulation.
    /// Bias terms, when included, are not penalized.
    L1Multinomial {
        data: ClassificationData,
        lambda: f64,
        #[serde(default = "default_true")]
        include_bias: bool,
    },
    /// Joint NNMF in `(W, H)` from a half-normal initialization.
    Nnmf {
        data: MatrixData,
        rank: usize,
        #[serde(default = "default_distance")]
        distance: Distance,
        #[serde(default)]
        tscad: Option<Tscad>,
        init_seed: u64,
    },
}

fn default_distance() -> Distance {
    Distance::Euclidean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassificationData {
    /// Features then an integer label (0-based) per row. `classes` defaults
    /// to the largest label plus one.
    Csv {
        path: PathBuf,
        #[serde(default)]
        classes: Option<usize>,
    },
    Synthetic {
        samples: usize,
        features: usize,
        classes: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixData {
    Csv {
        path: PathBuf,
    },
    Synthetic {
        rows: usize,
        cols: usize,
        rank: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SolverSpec {
    TmpMinimal(SolverConfig),
    TmpImproved(SolverConfig),
    TmpLocal(LocalSpec),
    ProjectedGradient(PgConfig),
}

/// Local-phase solver settings. Terminates at an ε_g-approximate
/// first-order point of `base.eps_g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSpec {
    pub base: SolverConfig,
    /// Active-set radius; defaults to `√eps_g`.
    pub delta: Option<f64>,
    /// When set, MINRES uses `η_k = min(eta_cap, ‖g_I‖)`; otherwise `base.eta`.
    pub eta_cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    #[default]
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub format: TraceFormat,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            trace: PathBuf::from("trace.jsonl"),
            summary: PathBuf::from("summary.json"),
            format: TraceFormat::Jsonl,
        }
    }
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl SolverSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SolverSpec::TmpMinimal(_) => "tmp_minimal",
            SolverSpec::TmpImproved(_) => "tmp_improved",
            SolverSpec::TmpLocal(_) => "tmp_local",
            SolverSpec::ProjectedGradient(_) => "projected_gradient",
        }
    }

    /// The target tolerance ε_g used for termination and the final check.
    pub fn eps_g(&self) -> f64 {
        match self {
            SolverSpec::TmpMinimal(c) | SolverSpec::TmpImproved(c) => c.eps_g,
            SolverSpec::TmpLocal(l) => l.base.eps_g,
            SolverSpec::ProjectedGradient(p) => p.eps_g,
        }
    }

    fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidInput(m) => field_err("solver", m),
            other => other,
        };
        match self {
            SolverSpec::TmpMinimal(c) | SolverSpec::TmpImproved(c) => c.validate().map_err(wrap),
            SolverSpec::TmpLocal(l) => {
                l.base.validate().map_err(wrap)?;
                if let Some(d) = l.delta {
                    if !(d >= 0.0 && d.is_finite()) {
                        return Err(field_err("solver.delta", "must be >= 0"));
                    }
                }
                if let Some(c) = l.eta_cap {
                    if !(c > 0.0) {
                        return Err(field_err("solver.eta_cap", "must be > 0"));
                    }
                }
                Ok(())
            }
            SolverSpec::ProjectedGradient(p) => p.validate().map_err(wrap),
        }
    }
}

impl ProblemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Nnls { .. } => "nnls",
            ProblemSpec::L1Multinomial { .. } => "l1_multinomial",
            ProblemSpec::Nnmf { .. } => "nnmf",
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ProblemSpec::Quadratic { .. } => Ok(()),
            ProblemSpec::Nnls {
                rows,
                cols,
                condition,
                ..
            } => {
                if *cols == 0 || rows < cols {
                    return Err(field_err("problem.rows", "need rows >= cols >= 1"));
                }
                if !(*condition >= 1.0 && condition.is_finite()) {
                    return Err(field_err("problem.condition", "must be >= 1"));
                }
                Ok(())
            }
            ProblemSpec::L1Multinomial { data, lambda, .. } => {
                if !(*lambda >= 0.0 && lambda.is_finite()) {
                    return Err(field_err("problem.lambda", "must be >= 0"));
                }
                match data {
                    ClassificationData::Csv {
                        classes: Some(c), ..
                    } if *c < 2 => Err(field_err("problem.data.classes", "must be >= 2")),
                    ClassificationData::Synthetic {
                        samples,
                        features,
                        classes,
                        ..
                    } if *samples == 0 || *features == 0 || *classes < 2 => Err(field_err(
                        "problem.data",
                        "need samples, features >= 1 and classes >= 2",
                    )),
                    _ => Ok(()),
                }
            }
            ProblemSpec::Nnmf {
                data, rank, tscad, ..
            } => {
                if *rank == 0 {
                    return Err(field_err("problem.rank", "must be >= 1"));
                }
                if let Some(t) = tscad {
                    t.validate().map_err(|e| field_err("problem.tscad", e))?;
                }
                match data {
                    MatrixData::Synthetic {
                        rows, cols, rank, ..
                    } if *rows == 0 || *cols == 0 || *rank == 0 => Err(field_err(
                        "problem.data",
                        "rows, cols and rank must be >= 1",
                    )),
                    _ => Ok(()),
                }
            }
        }
    }

    fn paths_mut(&mut self) -> Vec<(&'static str, &mut PathBuf)> {
        match self {
            ProblemSpec::Quadratic { a_path, b_path } => {
                vec![("problem.a_path", a_path), ("problem.b_path", b_path)]
            }
            ProblemSpec::L1Multinomial {
                data: ClassificationData::Csv { path, .. },
                ..
            } => vec![("problem.data.path", path)],
            ProblemSpec::Nnmf {
                data: MatrixData::Csv { path },
                ..
            } => vec![("problem.data.path", path)],
            _ => Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trace_every == 0 {
            return Err(field_err("trace_every", "must be >= 1"));
        }
        let w = &self.weights;
        if !(w.function > 0.0 && w.gradient > 0.0 && w.hessian_vec > 0.0) {
            return Err(field_err("weights", "all weights must be > 0"));
        }
        self.problem.validate()?;
        self.solver.validate()
    }

    /// Makes every relative path absolute with respect to `base` and checks
    /// that referenced data files exist.
    pub fn resolve_paths(&mut self, base: &Path) -> Result<()> {
        for (field, path) in self.problem.paths_mut() {
            if path.is_relative() {
                *path = base.join(&*path);
            }
            if !path.is_file() {
                return Err(field_err(
                    field,
                    format!("no such file: {}", path.display()),
                ));
            }
        }
        for path in [&mut self.output.trace, &mut self.output.summary] {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
        Ok(())
    }
}

/// Parses and validates a config document without touching the file system.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let config: RunConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    config.validate()?;
    Ok(config)
}

/// Reads, parses and validates a config file; relative paths are resolved
/// against its directory.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut config = parse_config(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    config.resolve_paths(&base)?;
    Ok(config)
}
