use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series of length {n} is too short for window length {q} (need n > q)")]
    SeriesTooShort { n: usize, q: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("autoregressive coefficients {0:?} are not stationary (characteristic root in the closed unit disk)")]
    NonStationary(Vec<f64>),

    #[error("series has zero empirical variance")]
    ZeroVariance,

    #[error("design matrix for AR order {order} is rank deficient")]
    RankDeficient { order: usize },

    #[error("constraint violated: {0}")]
    Constraint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
