use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("enumeration too large: {count} words exceeds cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },

    #[error("degenerate q: {0}")]
    DegenerateQ(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alphabet or coefficient domain mismatch: {0}")]
    Mismatch(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("size cap exceeded: {size} > {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
