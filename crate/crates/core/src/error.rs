//! Error type shared by every module in the crate.

use std::fmt;
use std::path::PathBuf;

/// Errors produced by the numeric routines and the I/O layer.
#[derive(Debug)]
pub enum Error {
    /// Dimension or shape mismatch between operands.
    Shape(String),
    /// Input violates a domain precondition (non-finite entries, parameter
    /// out of range, missing labels, negative data where nonnegativity is
    /// required).
    Domain(String),
    /// A matrix expected to be positive definite failed factorization.
    NotPositiveDefinite(String),
    /// Numerically degenerate input or state (zero tensor, vanishing
    /// separation scatter, non-finite objective).
    Degenerate(String),
    /// File system failure, with the offending path.
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed file content (ENVI header, CSV).
    Parse(String),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    /// True for errors that indicate numeric degeneracy rather than bad data.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::NotPositiveDefinite(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Shape(msg) => write!(f, "shape error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NotPositiveDefinite(msg) => {
                write!(f, "matrix not positive definite: {msg}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::Io { path, source } => {
                write!(f, "i/o error on {}: {source}", path.display())
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
