// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Inputs are valid in shape but carry no usable variation (constant
    /// amplitudes, zero-variance distance populations).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// DET has no off-LOI recurrences to normalize by.
    #[error("DET undefined: recurrence plot has no off-diagonal recurrences")]
    UndefinedDet,

    #[error("surrogate segment {segment} did not converge after {iterations} iterations")]
    Convergence { segment: usize, iterations: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
