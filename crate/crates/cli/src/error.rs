use std::io;
use std::path::PathBuf;

use qberry_core::Error as CoreError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("invalid JSON in {path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid arguments: {0}")]
    Argument(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{failed} of {total} criteria failed")]
    VerificationFailed { failed: usize, total: usize },
    #[error("evolution left the quadrupolar subspace (max |<S>| = {max_violation:.3e})")]
    QuadrupolarityLost { max_violation: f64 },
}

impl CliError {
    /// 0 ok, 1 verification failure, 2 input error, 3 numerical
    /// inconsistency, 4 physics assertion.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::VerificationFailed { .. } => 1,
            CliError::Read { .. } | CliError::Json { .. } | CliError::Argument(_) => 2,
            CliError::Write(_) | CliError::Csv(_) => 2,
            CliError::QuadrupolarityLost { .. } => 4,
            CliError::Core(e) => match e {
                CoreError::InconsistentPhases { .. }
                | CoreError::StepTooCoarse { .. }
                | CoreError::NotClosed { .. }
                | CoreError::LoopTooCoarse { .. }
                | CoreError::GapClosure { .. }
                | CoreError::NonCyclic
                | CoreError::OrthogonalNeighbors { .. } => 3,
                CoreError::NotQuantized { .. } => 4,
                _ => 2,
            },
        }
    }
}
