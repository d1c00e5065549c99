use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("argument {value} outside coverage (0, {limit}]")]
    OutOfCoverage { value: f64, limit: f64 },

    #[error("unknown multiplicative function spec `{0}`")]
    UnknownSpec(String),

    #[error("spec `{0}` has no tail bound; Euler product truncation cannot be certified")]
    NonConvergent(String),

    #[error("tail bound violated for `{name}` at p = {prime}")]
    TailBoundViolated { name: String, prime: u64 },

    #[error("tolerance {requested:e} unreachable in {context}; achieved {achieved:e}")]
    TolUnreachable { context: String, requested: f64, achieved: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
