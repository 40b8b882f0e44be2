use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] scma_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed or inconsistent document; `at` names the line or field.
    #[error("{at}: {message}")]
    Format { at: String, message: String },
    #[error("{0}")]
    Config(String),
}

impl SimError {
    pub fn format(at: impl Into<String>, message: impl Into<String>) -> Self {
        SimError::Format { at: at.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
