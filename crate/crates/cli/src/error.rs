use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    /// A failure while processing input data, tagged with the pipeline
    /// stage (`load`, `community`, `walk`, `train`, `eval`, `write`).
    #[error("{stage}: {source}")]
    Data {
        stage: String,
        #[source]
        source: care_core::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(1),
            CliError::Data {
                source: care_core::Error::InvalidConfig(_),
                ..
            } => ExitCode::from(1),
            CliError::Data { .. } => ExitCode::from(2),
            CliError::Internal(_) => ExitCode::from(3),
        }
    }
}

/// Attaches a stage label to core errors.
pub trait Stage<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError>;
}

impl<T> Stage<T> for care_core::Result<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|source| CliError::Data {
            stage: stage.into(),
            source,
        })
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, stage: impl Into<String>) -> Result<T, CliError> {
        self.map_err(|e| CliError::Data {
            stage: stage.into(),
            source: e.into(),
        })
    }
}
