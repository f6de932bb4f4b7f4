use thiserror::Error;

/// Errors raised across the expansion engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("generator outside the configured universe: {0}")]
    OutOfUniverse(String),
    #[error("singular normalization: Xi(0) = 0")]
    SingularNormalization,
    #[error("singular operator: {0}")]
    SingularOperator(String),
    #[error("odd-degree term in an exponent that must be even")]
    OddTerm,
    #[error("nonzero constant term where none is allowed")]
    ConstantTerm,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
