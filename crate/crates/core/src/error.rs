// Copyright 2026 The decohere Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("kernel is not Hermitian: imaginary diagonal part {0:e}")]
    NotHermitian(f64),

    #[error("numerical breakdown at t = {time}: {reason}")]
    Breakdown { time: f64, reason: String },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("config error in `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("malformed result file: {0}")]
    Format(String),

    #[error("{failed} of {total} trajectories broke down")]
    EnsembleAborted { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    #[cfg(feature = "files")]
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Breakdown { .. } | Error::EnsembleAborted { .. })
    }
}
