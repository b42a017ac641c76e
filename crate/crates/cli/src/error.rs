use thiserror::Error;

/// Failure classes of a run, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("I/O failure: {0}")]
    Io(String),

    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<timerobust::Error> for CliError {
    fn from(e: timerobust::Error) -> Self {
        match e {
            timerobust::Error::NonFinite(_) => CliError::Numeric(e.to_string()),
            other => CliError::Validation(vec![other.to_string()]),
        }
    }
}
