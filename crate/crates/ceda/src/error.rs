use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ceda_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable identifier for the error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(_) => "analysis",
            CliError::Io { .. } => "io",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
            CliError::Syntax { .. } => "syntax",
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
