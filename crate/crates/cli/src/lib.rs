//! Command implementations behind the `squeezeline` binary.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

/// Failure of a CLI run, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or inconsistent input (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// Numerical failure inside a pipeline stage (exit code 1).
    #[error("{stage}: {source}")]
    Compute {
        stage: &'static str,
        #[source]
        source: squeezeline::Error,
    },
    #[error("output error: {0}")]
    Output(String),
    /// Every stage ran but at least one check failed (exit code 1).
    #[error("checks failed: {0}")]
    ChecksFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Routes library errors that stem from user input to the config class.
    pub fn from_lib(stage: &'static str, e: squeezeline::Error) -> Self {
        use squeezeline::Error as E;
        match e {
            E::InvalidProfile(_)
            | E::InvalidFamily(_)
            | E::InvalidGrid(_)
            | E::EpsOutOfRange { .. }
            | E::InvalidArgument(_)
            | E::InvalidMomentum { .. }
            | E::TargetMismatch(_) => CliError::Config(format!("{stage}: {e}")),
            other => CliError::Compute { stage, source: other },
        }
    }
}

/// Attaches a stage name to library results.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for squeezeline::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_lib(stage, e))
    }
}
