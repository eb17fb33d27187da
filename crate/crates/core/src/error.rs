use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("sizing error: {what} needs {required} entries, cap is {cap}")]
    Sizing {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("index {index:?} outside the declared range {range}")]
    OutOfRange { index: Vec<usize>, range: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite symbol value at {0}")]
    NonFinite(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
