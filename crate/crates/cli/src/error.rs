// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<w2cpd::Error> for CliError {
    fn from(err: w2cpd::Error) -> Self {
        if err.is_numerical() {
            CliError::Numerical(err.to_string())
        } else if matches!(err, w2cpd::Error::InvalidParameter(_)) {
            CliError::Usage(err.to_string())
        } else {
            CliError::Data(err.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
