use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size cap (bits, cells, nodes) would be exceeded.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// An operation was called for a prime it does not cover.
    #[error("wrong dispatch: {0}")]
    Dispatch(String),

    /// A self-consistency check failed. Always a bug.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
