use thiserror::Error;

/// Failures of the dimension-proxy estimators. Kept apart from [`Error`] so
/// that an unavailable estimator is never confused with a numeric result.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EstimatorError {
    #[error("unknown compressor `{0}` (available: deflate)")]
    UnknownCompressor(String),
    #[error("unknown estimator spec `{0}`")]
    UnknownSpec(String),
    #[error("block size k={0} must be in 1..=20")]
    BadBlockSize(usize),
    #[error("compressor failure: {0}")]
    Compressor(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: value {value} outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: size {got} exceeds guard {limit}")]
    SizeGuard {
        what: &'static str,
        got: u128,
        limit: u128,
    },

    #[error("input too short: need {needed} bits, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error(transparent)]
    Estimator(#[from] EstimatorError),

    #[error("liminf surrogate {liminf} leaves no buffer headroom (use the randomize plan)")]
    NoBufferHeadroom { liminf: f64 },

    #[error("greedy cover of size {size} breaks the Delsarte-Piret bound {bound}")]
    CoverBound { size: usize, bound: f64 },

    #[error("buffer inequality fails at j={j}: lhs {lhs} <= rhs {rhs}")]
    BufferCheck { j: usize, lhs: f64, rhs: f64 },

    #[error("plan invariant violated: {0}")]
    PlanInvariant(String),

    #[error("malformed description: {0}")]
    Malformed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}
