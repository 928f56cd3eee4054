use std::path::Path;

use mvmf_core::estimator::EstimatorError;
use mvmf_core::planner::PlanError;
use mvmf_core::sim::SimError;
use mvmf_core::FieldError;
use thiserror::Error;

/// Errors surfaced by the command-line tool, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, or inputs that do not fit together.
    #[error("input error: {0}")]
    Input(String),
    /// The inputs are fine but no plan satisfies them.
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub const INPUT_EXIT: i32 = 2;
    pub const INFEASIBLE_EXIT: i32 = 3;
    pub const INTERNAL_EXIT: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => Self::INPUT_EXIT,
            CliError::Infeasible(_) => Self::INFEASIBLE_EXIT,
            CliError::Internal(_) => Self::INTERNAL_EXIT,
        }
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }

    pub(crate) fn write(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Internal(format!("writing {}: {e}", path.display()))
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::AllGridPointsFailed(_) | EstimatorError::KernelSingular { .. } => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Infeasible(_) | PlanError::NoClearPath { .. } | PlanError::NoActions => {
                CliError::Infeasible(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Stalled { .. } => CliError::Internal(e.to_string()),
            SimError::Plan(p) => p.into(),
            SimError::Field(f) => f.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
