use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The request is well-formed but outside what this implementation covers.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The requested evaluation leaves the validated accuracy window.
    #[error("accuracy window exceeded: {0}")]
    Accuracy(String),
    /// Two cells do not share a boundary segment of positive length.
    #[error("cells {0} and {1} do not share a facet")]
    NotAdjacent(usize, usize),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}
