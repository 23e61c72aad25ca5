use kho_core::KhoError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] KhoError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical-guard failures, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(KhoError::Io(_) | KhoError::Csv(_) | KhoError::Json(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}
