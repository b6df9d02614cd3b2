use std::path::PathBuf;

use qcontext::bell::BellError;
use qcontext::context::KernelError;
use qcontext::liar::LiarError;
use qcontext::poll::PollError;
use qcontext::structure::StructureError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// 2 for anything the user can fix in the input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Json { .. } | CliError::Input(_) => 2,
            CliError::Write { .. } | CliError::Internal(_) => 1,
        }
    }
}

impl From<BellError> for CliError {
    fn from(e: BellError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PollError> for CliError {
    fn from(e: PollError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<LiarError> for CliError {
    fn from(e: LiarError) -> Self {
        match e {
            LiarError::NotPermutationMatrix(_) | LiarError::Decomposition(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}
