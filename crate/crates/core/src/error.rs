use thiserror::Error;

/// Errors raised by model construction, decomposition and inference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite potential value {value} in {location}")]
    NonFinite { location: String, value: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// An exhaustive operation would exceed its configured budget.
    #[error("exponential operation refused: {what} needs {needed} but the cap is {cap}")]
    CapExceeded { what: String, needed: u128, cap: u128 },

    #[error("operation requires a binary alphabet, model has {0} states")]
    NotBinary(usize),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
