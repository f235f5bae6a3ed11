use thiserror::Error;

/// Process exit codes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Pass = 0,
    SuiteFailure = 1,
    ConfigError = 2,
    NumericalError = 3,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("numerical error: {0}")]
    Numerical(#[from] kirchhoff_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl ExperimentError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Config { path: path.into(), message: message.into() }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            Self::Config { .. } => ExitCode::ConfigError,
            Self::Numerical(kirchhoff_core::Error::Parameter(_)) => ExitCode::ConfigError,
            _ => ExitCode::NumericalError,
        }
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;
