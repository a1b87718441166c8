//! Library half of the `efqs` binary: scenario configs, the scenario
//! runner, config-free sweep shortcuts, and the validation suite.

pub mod config;
pub mod predict;
pub mod scenario;
pub mod sweeps;
pub mod validation;

use std::fmt;

/// Process-level error carrying its own exit code. Usage and config
/// problems exit 2, capacity refusals exit 3; validation failures are not
/// errors (the validate command reports them and exits 1 itself).
#[derive(Debug)]
pub enum AppError {
    /// Malformed or inconsistent configuration, bad flag values.
    Config(String),
    /// Output directory holds results from a different config and --force
    /// was not given.
    Refused(String),
    /// A requested system size exceeds the dense cap.
    Capacity(String),
    Io(std::io::Error),
    Lib(efqs::Error),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Refused(m) => write!(f, "{m}"),
            AppError::Capacity(m) => write!(f, "capacity error: {m}"),
            AppError::Io(e) => write!(f, "io error: {e}"),
            AppError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<efqs::Error> for AppError {
    fn from(e: efqs::Error) -> Self {
        AppError::Lib(e)
    }
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Capacity(_) => 3,
            AppError::Lib(efqs::Error::Capacity { .. }) => 3,
            _ => 2,
        }
    }
}
