use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numeric procedure produced non-finite values or an
    /// ill-conditioned system that could not be solved.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// Start or goal lies in occupied space above the safety threshold.
    #[error("infeasible endpoints: {0}")]
    InfeasibleEndpoints(String),

    /// A sampling planner exhausted its budget without reaching the goal.
    #[error("planning failure: {0}")]
    PlanningFailure(String),

    /// Random world generation could not place an obstacle.
    #[error("placement failure: {0}")]
    PlacementFailure(String),

    /// A log stream contained no usable records.
    #[error("parse failure: {0}")]
    ParseFailure(String),

    /// A structured data file violates its schema.
    #[error("format error at line {line}: {message}")]
    FormatError { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::NumericFailure(msg.into())
    }
}
