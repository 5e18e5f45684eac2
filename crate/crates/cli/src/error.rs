use sipframe_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad spec, arguments or task precondition. Exit code 1.
    #[error("{0}")]
    Validation(String),
    /// Solver failure or output failure. Exit code 2.
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NotConverged { .. } => CliError::Numerical(e.to_string()),
            CoreError::Precondition {
                ref reason,
                witness: Some(ref w),
            } => {
                let coords: Vec<String> = w.0.iter().map(|z| format!("{z}")).collect();
                CliError::Validation(format!("precondition violated: {reason}; witness functional [{}]", coords.join(", ")))
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}
