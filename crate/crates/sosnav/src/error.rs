use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(
        "{path}: schema version {} is not supported (this build reads version {expected})",
        found.map_or_else(|| "<missing>".to_string(), |v| v.to_string())
    )]
    SchemaVersion {
        path: PathBuf,
        found: Option<u32>,
        expected: u32,
    },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error("unknown policy `{name}`; valid names: {}", valid.join(", "))]
    UnknownPolicy { name: String, valid: Vec<String> },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] sosnav_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, e: impl std::fmt::Display) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    /// Whether the failure stems from user-supplied configuration or input
    /// files rather than the environment or I/O.
    pub fn is_configuration(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Json(_))
    }
}
