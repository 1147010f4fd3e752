use std::fmt;

use magnon_core::{FitError, ModelError, SphereError};

/// Exit code 1 for bad input, 2 for numerical failures.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SphereError> for CliError {
    fn from(e: SphereError) -> Self {
        match e {
            SphereError::ZeroEll | SphereError::Permittivity(_) | SphereError::Invalid(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        match e {
            FitError::Invalid(_) | FitError::Unsorted | FitError::TooFewPoints { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
