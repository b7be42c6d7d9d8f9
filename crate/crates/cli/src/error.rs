use thiserror::Error;

/// Failures of a driver run, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(#[from] cylinder_core::Error),
    #[error("acceptance failure: criteria {0:?} failed")]
    Acceptance(Vec<u8>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use cylinder_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(E::NothingToVerify(_) | E::InvalidParameter(_) | E::InvalidOperator(_)) => 2,
            CliError::Numerical(_) => 3,
            CliError::Acceptance(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) if self.exit_code() == 2 => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Acceptance(_) => "acceptance",
            CliError::Io(_) => "io",
        }
    }
}
