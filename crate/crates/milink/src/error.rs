//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by model construction, magnetics, the circuit solver,
/// and the configuration front end.
#[derive(Debug, Error)]
pub enum Error {
    /// Geometry the requested operation cannot handle (coincident centers,
    /// intersecting filaments, bundle thicker than the loop).
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Out-of-range or inconsistent argument.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Invalid scenario or network description.
    #[error("configuration error: {0}")]
    Config(String),

    /// Linear solve or derived quantity failed numerically.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// File read/write failure, with path context.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Appends context (e.g. the failing sweep point) to the message.
    pub(crate) fn with_context(self, ctx: &str) -> Error {
        match self {
            Error::Geometry(m) => Error::Geometry(format!("{m} ({ctx})")),
            Error::Parameter(m) => Error::Parameter(format!("{m} ({ctx})")),
            Error::Config(m) => Error::Config(format!("{m} ({ctx})")),
            Error::Numerical(m) => Error::Numerical(format!("{m} ({ctx})")),
            Error::Io(m) => Error::Io(format!("{m} ({ctx})")),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
