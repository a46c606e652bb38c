use std::process::ExitCode;

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit code 2.
    Config(String),
    /// Solver, scheme or I/O failure; exit code 1.
    Failure(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Failure(_) => ExitCode::from(1),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => f.write_str(msg),
            CliError::Failure(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<eulimit::Error> for CliError {
    fn from(e: eulimit::Error) -> Self {
        match e {
            eulimit::Error::Domain(_) | eulimit::Error::Unsupported(_) => CliError::Config(e.to_string()),
            other => CliError::Failure(other.into()),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failure(e)
    }
}
