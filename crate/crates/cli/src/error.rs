use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Physics(#[from] kicklens::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Physics(e) => e.kind(),
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Physics(kicklens::Error::Config(_)) => ExitCode::from(2),
            CliError::Physics(_) => ExitCode::from(3),
            CliError::Io { .. } => ExitCode::from(1),
        }
    }
}
