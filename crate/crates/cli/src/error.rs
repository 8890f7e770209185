use std::process::ExitCode;

/// Failure classes of the command-line driver, each with its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invariant failure: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }

    pub fn to_exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }

    /// Prefixes the message with the scenario field it came from.
    pub fn context(self, field: &str) -> Self {
        match self {
            CliError::Parse(m) => CliError::Parse(format!("{field}: {m}")),
            CliError::Validation(m) => CliError::Validation(format!("{field}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{field}: {m}")),
            CliError::Invariant(m) => CliError::Invariant(format!("{field}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{field}: {m}")),
        }
    }
}

impl From<qretro_core::Error> for CliError {
    fn from(e: qretro_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
