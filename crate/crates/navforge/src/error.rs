//! Error-to-exit-code mapping for the CLI.
//!
//! Exit codes are a stable contract: 0 success, 2 user/config error,
//! 3 runtime fault.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad input from the user: unknown names, malformed files, mismatched
    /// checkpoints. Exit code 2.
    Usage(String),
    /// Something went wrong at runtime: simulation or training fault,
    /// unwritable output. Exit code 3.
    Fault(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Fault(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Fault(msg) => write!(f, "fault: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<navforge_core::Error> for CliError {
    fn from(e: navforge_core::Error) -> Self {
        match e {
            navforge_core::Error::SimFault { .. } | navforge_core::Error::TrainFault(_) => {
                CliError::Fault(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// IO on user-supplied input paths is a usage error; everything else
/// (writing outputs) is a runtime fault, tagged at the call site.
pub fn read_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("cannot read {}: {e}", path.display()))
}

pub fn write_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Fault(format!("cannot write {}: {e}", path.display()))
}
