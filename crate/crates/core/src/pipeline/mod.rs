//! Configuration driven end-to-end closure analysis.

pub mod config;
pub mod opparse;
pub mod report;
mod run;
mod sandwich;
pub mod sidecar;

use thiserror::Error;

use crate::frames::ChartError;
use crate::invert::InvertError;
use crate::limits::LimitError;
use crate::numverify::NumError;
use crate::opalgebra::OpError;
use crate::symexpr::ExprError;

pub use config::{ChartConfig, ClosureConfig, OutputConfig, SolverConfig, WeightsConfig};
pub use report::*;
pub use run::{chart_summary, provenance, run_closure, snap_point};
pub use sandwich::{expected_upper, run_epsilon_sandwich};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Limit(#[from] LimitError),
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Invert(#[from] InvertError),
    #[error(transparent)]
    Num(#[from] NumError),
    #[error("io: {0}")]
    Io(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl PipelineError {
    /// 2 for invalid input, 3 for a non-generic point, 4 for internal and
    /// I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Limit(LimitError::NonGeneric(_)) => 3,
            PipelineError::Limit(LimitError::NotSingular) => 2,
            PipelineError::Config(_) | PipelineError::Chart(_) | PipelineError::Expr(_) => 2,
            PipelineError::Op(OpError::NotInFrameAlgebra { .. }) => 2,
            PipelineError::Limit(LimitError::Chart(_) | LimitError::Expr(_) | LimitError::BadPoint) => 2,
            PipelineError::Limit(LimitError::Op(OpError::NotInFrameAlgebra { .. })) => 2,
            _ => 4,
        }
    }
}
