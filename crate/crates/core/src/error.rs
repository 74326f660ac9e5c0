use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty {0}")]
    Empty(&'static str),

    #[error("{what}[{position}] = {value} is out of bounds (limit {limit})")]
    IndexOutOfBounds {
        what: &'static str,
        position: usize,
        value: u64,
        limit: u64,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("missing duration for stage {0}")]
    MissingStage(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
