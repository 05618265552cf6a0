use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("check failed: {0}")]
    Check(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
        }
    }
}

impl From<sigauto_core::Error> for CliError {
    fn from(e: sigauto_core::Error) -> Self {
        use sigauto_core::Error as E;
        match e {
            E::Config(msg) => CliError::Config(msg),
            E::EmptyGrid | E::WindowOutOfRange { .. } | E::InsufficientHistory { .. } => {
                CliError::Config(e.to_string())
            }
            E::Io(io) => CliError::Io(io),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
