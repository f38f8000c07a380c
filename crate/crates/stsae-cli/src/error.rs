//! Error classification for exit codes: 0 success, 1 usage, 2 data error,
//! 3 numerical failure.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitCode {
    Success = 0,
    Usage = 1,
    Data = 2,
    Numerical = 3,
}

#[derive(Debug)]
pub enum CliError {
    /// Malformed input files or inconsistent configuration.
    Data(String),
    /// Linear-algebra or sampling breakdowns.
    Numerical(String),
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Data(_) => ExitCode::Data,
            CliError::Numerical(_) => ExitCode::Numerical,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Data(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

fn is_numerical(err: &stsae_core::Error) -> bool {
    use stsae_core::Error::*;
    match err {
        CholeskyFailure { .. }
        | EigenFailure
        | NonPositiveFactor { .. }
        | CorrelationOutOfRange { .. }
        | NonPositiveVariance { .. } => true,
        ChainAborted { source, .. } => is_numerical(source),
        _ => false,
    }
}

impl From<stsae_core::Error> for CliError {
    fn from(err: stsae_core::Error) -> Self {
        if is_numerical(&err) {
            CliError::Numerical(err.to_string())
        } else {
            CliError::Data(err.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(format!("io error: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
