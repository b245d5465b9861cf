use thiserror::Error;

/// Failure modes shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A size or dimension is unsupported (odd Pfaffian order, empty group, non-square input).
    #[error("dimension error: {0}")]
    Dimension(String),
    /// Input has the wrong structure (not skew, mismatched universes or sizes).
    #[error("shape error: {0}")]
    Shape(String),
    /// An index is outside its admissible range.
    #[error("index error: {0}")]
    Index(String),
    /// A numeric argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A run configuration is invalid or a documented limit was exceeded.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
