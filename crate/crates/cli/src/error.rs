// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

/// Exit codes: 0 success, 1 other failure, 2 invalid input or config,
/// 3 I/O, 4 surrogate convergence, 5 degenerate data.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    /// Output failed a hard constraint check.
    Constraint(String),
    Core(srcrqa::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Constraint(_) => 1,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                srcrqa::Error::InvalidInput(_) | srcrqa::Error::Format(_) => 2,
                srcrqa::Error::Io(_) | srcrqa::Error::Csv(_) => 3,
                srcrqa::Error::Convergence { .. } => 4,
                srcrqa::Error::Degenerate(_) | srcrqa::Error::UndefinedDet => 5,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Constraint(m) => write!(f, "constraint violated: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<srcrqa::Error> for CliError {
    fn from(e: srcrqa::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}
