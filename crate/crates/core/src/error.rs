use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (odd degree sum, n = 0, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A trace, prefix or matching that does not describe a reachable state.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("statistic `{statistic}`: component of size {size} exceeds cap {cap}")]
    CapExceeded {
        statistic: String,
        size: usize,
        cap: usize,
    },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("every replication was dropped ({dropped} cap-exceeded)")]
    EmptyResult { dropped: usize },

    #[error("rejection budget exhausted after {attempts} attempts (acceptance rate {rate})")]
    RejectionBudget { attempts: usize, rate: f64 },

    #[error("sample too small: need at least {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("statistic `{0}` has no exact representation in this scalar type")]
    InexactScalar(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
