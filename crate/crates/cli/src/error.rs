use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config document does not match the schema. Raised before any
    /// computation starts.
    #[error("config error: {0}")]
    Schema(String),
    /// A library call rejected its inputs or failed mid-run.
    #[error("{context}: {message}")]
    Runtime { context: String, message: String },
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn schema(message: impl Into<String>) -> Self {
        CliError::Schema(message.into())
    }

    pub fn runtime(context: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CliError::Runtime { context: context.into(), message: err.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for schema violations, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Runtime { .. } | CliError::Io { .. } => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Runtime { .. } => "runtime",
            CliError::Io { .. } => "io",
        }
    }

    pub fn record(&self, command: Option<&str>) -> ErrorRecord {
        ErrorRecord {
            status: "error",
            kind: self.kind(),
            command: command.map(str::to_owned),
            message: self.to_string(),
            exit_code: self.exit_code(),
        }
    }
}

/// Machine-readable failure report, printed to stderr and written as
/// `error.json` when the output directory is usable.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorRecord {
    pub status: &'static str,
    pub kind: &'static str,
    pub command: Option<String>,
    pub message: String,
    pub exit_code: i32,
}
