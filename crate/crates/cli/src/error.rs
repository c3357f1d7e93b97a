use cfx_core::CfxError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    pub fn from_core(e: CfxError) -> Self {
        match e {
            CfxError::Infeasible(m) => CliError::Infeasible(m),
            CfxError::InvalidParameter(_)
            | CfxError::DimensionMismatch { .. }
            | CfxError::Domain { .. } => CliError::Config(e.to_string()),
            e => CliError::Runtime(e.to_string()),
        }
    }

    pub fn io(what: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{what}: {e}"))
    }
}
