use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),

    #[error("element {0} is not in the kernel of the projection")]
    NotInKernel(String),

    #[error("sequence is not contained in the source sequence: {0}")]
    NotContained(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("resource budget exceeded: {what} = {requested} > limit {limit}")]
    Budget {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
