use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("argument outside the accuracy window of {what}: {detail}")]
    Accuracy { what: &'static str, detail: String },

    #[error("{what} failed to converge after {iterations} iterations")]
    Convergence { what: &'static str, iterations: usize },

    #[error("value at index {k} is not representable in f64 ({what})")]
    Overflow { what: &'static str, k: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}
