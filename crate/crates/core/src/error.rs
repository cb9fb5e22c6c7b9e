use thiserror::Error;

/// Errors raised by the numerical routines and problem constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible point: x[{index}] = {value} < 0")]
    InfeasiblePoint { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("masked operator requested on an empty inactive set")]
    EmptyInactiveSet,

    #[error("line search stalled: step size fell below {alpha_min:e}")]
    LineSearchStall { alpha_min: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("label {label} out of range for {classes} classes (sample {sample})")]
    LabelOutOfRange {
        sample: usize,
        label: usize,
        classes: usize,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
