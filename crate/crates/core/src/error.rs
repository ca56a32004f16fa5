use thiserror::Error;

use crate::traces::ConvergenceHistory;

pub type Result<T> = std::result::Result<T, EdgeError>;

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("data does not decay: outer-shell magnitude {magnitude:e} exceeds {tolerance:e}")]
    NoDecay { magnitude: f64, tolerance: f64 },

    #[error("denominator {value:e} below guard {guard:e} at {location}")]
    DenominatorGuard {
        value: f64,
        guard: f64,
        location: String,
    },

    #[error("boundary traces did not converge after {} iterations", history.rows.len())]
    NonConvergence { history: ConvergenceHistory },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit window rejected: {0}")]
    FitWindow(String),

    #[error("expansion order {order} not resolvable: {reason}")]
    ExpansionOrder { order: usize, reason: String },

    #[error("corrupt container: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
