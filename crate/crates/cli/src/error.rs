use thiserror::Error;

/// CLI failure, split by exit code: 1 for usage and configuration problems,
/// 2 for runtime and numeric failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<swae::Error> for CliError {
    fn from(e: swae::Error) -> Self {
        match e {
            swae::Error::Step { .. } | swae::Error::NonFinite(_) | swae::Error::Io(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
