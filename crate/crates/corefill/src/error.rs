use thiserror::Error;

/// Errors surfaced by the pricing engine.
///
/// `Input` covers malformed instances, points, and arguments; `Capacity` is
/// the guard on the exhaustive solvers; `Contract` is a violated caller-side
/// precondition on otherwise well-formed data (e.g. a point that is not in
/// the core); `Invariant` is an internal consistency failure and always a
/// bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("contract error: {0}")]
    Contract(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}
