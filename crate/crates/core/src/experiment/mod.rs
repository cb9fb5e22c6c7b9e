//! Declarative experiment runs: JSON configuration, problem construction,
//! solver dispatch and trace/summary output.

mod config;
mod output;
mod run;

pub use config::{
    load_config, parse_config, ClassificationData, LocalSpec, MatrixData, OutputSpec, ProblemSpec,
    RunConfig, SolverSpec, TraceFormat,
};
pub use output::{emit_snapshots, emit_trace, snapshot_path, TRACE_FIELDS};
pub use run::{build_problem, run_experiment, RunOptions, RunSummary};

/// Environment variable that redirects trace and summary files to another
/// directory.
pub const OUTPUT_DIR_ENV: &str = "NMRTMP_OUTPUT_DIR";
