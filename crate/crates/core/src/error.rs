use thiserror::Error;

/// Errors produced by the distance, sampling, network and training routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("sample count mismatch in {context}: {left} vs {right}")]
    CountMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("direction {index} is not unit length (norm = {norm})")]
    NotUnit { index: usize, norm: f64 },

    #[error("exact solver is limited to {cap} points per cloud, got {n}; use sliced_wasserstein for larger clouds")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("forward cache does not match network: {0}")]
    StaleCache(String),

    #[error("training step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint format: {0}")]
    Checkpoint(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
