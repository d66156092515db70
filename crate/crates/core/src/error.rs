use std::path::PathBuf;
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected_width}x{expected_height}, found {found_width}x{found_height}")]
    Dimension {
        expected_width: usize,
        expected_height: usize,
        found_width: usize,
        found_height: usize,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("inpainting backend exited with {status}: {stderr}")]
    Backend { status: String, stderr: String },

    #[error("inpainting protocol violation: {0}")]
    Protocol(String),

    #[error("inpainting backend timed out after {0:?}")]
    Timeout(Duration),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the variant, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Parameter(_) => "parameter",
            Error::EmptySelection(_) => "empty_selection",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Format { .. } => "format",
            Error::Backend { .. } => "backend",
            Error::Protocol(_) => "protocol",
            Error::Timeout(_) => "timeout",
            Error::Manifest(_) => "manifest",
            Error::Io { .. } => "io",
        }
    }

    /// Display text followed by every underlying cause.
    pub fn full_message(&self) -> String {
        let mut msg = self.to_string();
        let mut cause = std::error::Error::source(self);
        while let Some(c) = cause {
            msg.push_str(": ");
            msg.push_str(&c.to_string());
            cause = c.source();
        }
        msg
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn empty(msg: impl Into<String>) -> Self {
        Error::EmptySelection(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::Dimension {
            expected_width: expected.0,
            expected_height: expected.1,
            found_width: found.0,
            found_height: found.1,
        }
    }
}
