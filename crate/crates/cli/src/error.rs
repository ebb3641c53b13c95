use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Runtime(#[from] adatriplet::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn from_core_config(e: adatriplet::Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}
