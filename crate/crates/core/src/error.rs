use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),

    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid include pattern `{pattern}`: {message}")]
    InvalidGlob { pattern: String, message: String },

    #[error("duplicate source path `{0}` in forest")]
    DuplicatePath(String),

    #[error("no source files matched under {0}")]
    EmptyForest(PathBuf),

    #[error("malformed key `{text}`: {reason}")]
    MalformedKey { text: String, reason: &'static str },

    #[error("invalid entry point filter `{0}`")]
    InvalidEntryFilter(String),

    #[error("entry point filter matched no methods")]
    NoEntryPoints,

    #[error("resolver failed at {site}: {message}")]
    Resolve { site: String, message: String },

    #[error("cache version mismatch: expected {expected}, found {found}")]
    CacheVersion { expected: String, found: String },

    #[error("cache is stale: {0}")]
    StaleCache(String),

    #[error("graph schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
