use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unsupported evolution: {0}")]
    UnsupportedEvolution(String),

    #[error("impossible post-selection: normalizer {normalizer:e} vanishes")]
    ImpossiblePostselection { normalizer: f64 },

    #[error("zero total weight: {0}")]
    ZeroTotal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn grid(msg: impl Into<String>) -> Error {
    Error::Grid(msg.into())
}
