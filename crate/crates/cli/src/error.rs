use std::path::PathBuf;

use thiserror::Error;

/// Process exit status for usage and configuration errors, including
/// inputs that are missing, unreadable or incompatible.
pub const EXIT_USAGE: i32 = 2;
/// Process exit status for inputs that parse but cannot support the run.
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: srlknn_core::Error,
    },
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn core(context: impl Into<String>, source: srlknn_core::Error) -> Self {
        CliError::Core {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use srlknn_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Output { .. } => EXIT_DATA,
            CliError::Core { source, .. } => match source {
                E::EmptyScanSet
                | E::EmptyDatabase
                | E::EmptyTrajectory
                | E::EmptyStep { .. }
                | E::EmptyAfterFilter(_)
                | E::ZeroVariance
                | E::TooShort { .. }
                | E::LengthMismatch { .. } => EXIT_DATA,
                _ => EXIT_USAGE,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a context string to core results.
pub trait Context<T> {
    fn context(self, context: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T> Context<T> for srlknn_core::Result<T> {
    fn context(self, context: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| CliError::core(context(), e))
    }
}
