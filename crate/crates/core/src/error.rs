use std::path::PathBuf;

use thiserror::Error;

/// Failure modes of a single fitness evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// The evaluation budget of the problem has been spent.
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error("coordinate {index} = {value} lies outside [{lower}, {upper}]")]
    OutOfBounds {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("expected a point of dimension {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem id {0}: expected 1..=20")]
    InvalidProblem(usize),
    #[error("problem has no global optima")]
    NoGlobalOptima,
    #[error("missing data file {}", .0.display())]
    MissingData(PathBuf),
    #[error("malformed data file {}: {reason}", .path.display())]
    MalformedData { path: PathBuf, reason: String },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("cannot select {k} points from {n} candidates")]
    SubsetSize { k: usize, n: usize },
    #[error("invalid restart parameters: {0}")]
    InvalidRestartParams(String),
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid accuracy level {0}")]
    InvalidAccuracy(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
