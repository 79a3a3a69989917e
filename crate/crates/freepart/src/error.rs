use thiserror::Error;

/// Library-wide error type. The CLI maps variants to exit codes:
/// config/usage -> 2, resource/truncation -> 3, oracle mismatch -> 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Io(_) => 2,
            Error::ResourceLimit(_) | Error::Truncation(_) => 3,
            Error::OracleMismatch(_) => 4,
        }
    }
}
