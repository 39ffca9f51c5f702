use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("energy mean {energy} does not match power {power}")]
    MeanMismatch { energy: f64, power: f64 },

    #[error("input distribution is not on the probability simplex: {0}")]
    NotOnSimplex(String),

    #[error("row {row} of the transition matrix sums to {sum}, expected 1")]
    RowSum { row: usize, sum: f64 },

    #[error("malformed channel: {0}")]
    MalformedChannel(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("target cost {target} outside achievable range [{min}, {max}]")]
    CostOutOfRange { target: f64, min: f64, max: f64 },

    #[error("could not bracket the cost multiplier for target cost {target}")]
    BracketFailure { target: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("compute budget exceeded: {0}")]
    Budget(String),

    #[error("mode mismatch: {0}")]
    Mode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
