//! Companion-crate error type with the exit-code policy: 1 for
//! evaluation/metric errors, 2 for IO and schema errors, 3 for cache
//! errors.

use biyu_core::metrics::MetricsError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("patch conflict: {0}")]
    PatchConflict(String),
    #[error("alignment error: unmatched ids: {0}")]
    Alignment(String),
    #[error("metrics error: {0}")]
    Metrics(#[from] MetricsError),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("corrupt cache entry {digest}: {reason}")]
    CorruptEntry { digest: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub fn io(path: &std::path::Path, source: std::io::Error) -> Error {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Stable machine-readable error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::SchemaMismatch(_) => "schema-mismatch",
            Error::Config(_) => "config",
            Error::PatchConflict(_) => "patch-conflict",
            Error::Alignment(_) => "alignment",
            Error::Metrics(_) => "metrics",
            Error::Cache(_) => "cache",
            Error::CorruptEntry { .. } => "corrupt-entry",
            Error::Invalid(_) => "invalid",
        }
    }

    /// Process exit code: 1 evaluation/metric, 2 IO/schema, 3 cache.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Alignment(_) | Error::Metrics(_) => 1,
            Error::Io { .. }
            | Error::Parse { .. }
            | Error::SchemaMismatch(_)
            | Error::Config(_)
            | Error::PatchConflict(_)
            | Error::Invalid(_) => 2,
            Error::Cache(_) | Error::CorruptEntry { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
