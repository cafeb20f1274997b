//! Batch front end: reads a sectioned key-value experiment configuration,
//! runs the requested computation routes, cross-validates them and writes
//! CSV curves plus a comparison report. See the `shotspec` binary for the
//! command-line surface.

pub mod config;
pub mod csvio;
pub mod report;
pub mod runner;

use std::fmt;
use std::io;
use std::path::PathBuf;

/// Errors that terminate a run before any comparison verdict: bad usage,
/// unparseable or inconsistent configuration, I/O trouble, or a domain error
/// from the computation core.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config { line: Option<usize>, message: String },
    Io { path: PathBuf, source: io::Error },
    Core(shotspec_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Config { line: Some(line), message } => {
                write!(f, "configuration error at line {line}: {message}")
            }
            CliError::Config { line: None, message } => {
                write!(f, "configuration error: {message}")
            }
            CliError::Io { path, source } => write!(f, "i/o error on {}: {source}", path.display()),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<shotspec_core::Error> for CliError {
    fn from(err: shotspec_core::Error) -> Self {
        CliError::Core(err)
    }
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config {
            line: None,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
