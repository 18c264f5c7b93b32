//! Error classes of the command-line tool and their exit codes.

use std::fmt;
use std::io;
use std::path::Path;

use dualscore_core::Error as CoreError;

/// Failure category, which fixes the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or configuration.
    Usage,
    /// Unreadable, malformed or inconsistent input data.
    Data,
    /// The estimation itself broke down.
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Usage => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::Usage => "usage",
            ErrorKind::Data => "data",
            ErrorKind::Numeric => "numeric",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Usage,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Data,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Numeric,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        CliError::data(format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with `context: `.
    pub fn context(mut self, context: impl fmt::Display) -> Self {
        self.message = format!("{context}: {}", self.message);
        self
    }

    /// The single stderr line printed on failure: tab-separated `key=value`
    /// fields with the message flattened to one line.
    pub fn report_line(&self) -> String {
        let flat: String = self
            .message
            .chars()
            .map(|c| if c == '\n' || c == '\r' || c == '\t' { ' ' } else { c })
            .collect();
        format!("error\tkind={}\tcode={}\tmessage={}", self.kind.name(), self.kind.exit_code(), flat)
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let kind = match err.root() {
            CoreError::DegenerateIndex
            | CoreError::ZeroVector
            | CoreError::Singularity(_)
            | CoreError::EmptyGrid
            | CoreError::TooManyFailures { .. } => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        };
        CliError {
            kind,
            message: err.to_string(),
        }
    }
}

/// Attaches a file path to IO failures.
pub(crate) trait IoContext<T> {
    fn at(self, path: &Path) -> CliResult<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: &Path) -> CliResult<T> {
        self.map_err(|e| CliError::io(path, e))
    }
}
