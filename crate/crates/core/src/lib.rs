//! Newton-MR two-metric projection methods for nonnegativity-constrained
//! nonconvex optimization.

// Negated comparisons reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod fdcheck;
pub mod linalg;
pub mod minres;
pub mod oracle;
pub mod orthant;
pub mod problems;
pub mod solvers;

pub use baselines::{projected_gradient_solve, PgConfig};
pub use error::{Error, Result};
pub use minres::{minres_solve, DirectionType, MinresConfig, MinresOutcome};
pub use oracle::{CountedOracle, FnObjective, Objective, OracleCounters, OracleWeights};
pub use orthant::{check_eps_fo, partition_indices, project};
pub use solvers::{
    solve_improved, solve_local, solve_minimal, SolveReport, SolveStatus, SolverConfig, TraceRecord,
};
