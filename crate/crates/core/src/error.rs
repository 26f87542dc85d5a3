use thiserror::Error;

use crate::solver::Status;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("state is not strictly interior (min facet value {min_value:e})")]
    NotInterior { min_value: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("rank deficient: {what} (smallest singular value {sigma:e})")]
    RankDeficient { what: String, sigma: f64 },

    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("enumeration of {count} items exceeds cap {cap}")]
    EnumerationOverflow { count: usize, cap: usize },

    #[error("support mismatch at index {index}")]
    SupportMismatch { index: usize },

    #[error("enclosure [{lower}, {upper}] wider than requested {tol:e}")]
    EnclosureTooWide { lower: f64, upper: f64, tol: f64 },

    #[error("relaxation at level {level} is infeasible")]
    InfeasibleRelaxation { level: usize },

    #[error("no rounding term passed certification (smallest residual {worst:e})")]
    NoFeasibleTerm { worst: f64 },

    #[error("lift inconsistent: {0}")]
    LiftInconsistent(String),

    #[error("solver failed on '{name}': {status:?}")]
    Solver { name: String, status: Status },

    #[error("backend: {0}")]
    Backend(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Solver-side failures map to a different CLI exit code than domain errors.
    pub fn is_solver_failure(&self) -> bool {
        matches!(self, Error::Solver { .. } | Error::Backend(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
