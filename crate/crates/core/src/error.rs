use thiserror::Error;

/// Errors raised by density construction, entropy evaluation and the
/// verification routines built on top of them.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid density: {0}")]
    InvalidGrid(String),

    #[error("degenerate interval [{a}, {b}]")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("step larger than interval: h = {h}, length = {len}")]
    StepTooLarge { h: f64, len: f64 },

    #[error("grid steps differ: {0} vs {1}")]
    MismatchedSteps(f64, f64),

    #[error("invalid Rényi order: {0}")]
    InvalidOrder(String),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("certification missing: {0}")]
    NotCertified(String),

    #[error("invalid transfer: {0}")]
    InvalidTransfer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
