use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unknown scenario key `{0}`")]
    UnknownKey(String),

    #[error("cannot parse `{value}` for `{key}`: {reason}")]
    Parse {
        key: String,
        value: String,
        reason: String,
    },

    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("link distance {distance} m is below the minimum {minimum} m")]
    DistanceBelowMinimum { distance: f64, minimum: f64 },

    #[error("downlink user {user} is not served by cell 0 (only {served} users)")]
    UserNotServed { user: usize, served: usize },

    #[error("link budget has no cells")]
    EmptyBudget,

    #[error("limit diverges: contamination set is empty")]
    DivergentLimit,

    #[error("empirical CDF needs at least one sample")]
    EmptySamples,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
