//! Monte Carlo experiments over the estimators in `gsp-core`: MSE versus training size
//! and noise level, MSE after topology changes, and fit runtimes. The `gsp`
//! binary wraps these behind a command line.

pub mod cli;
pub mod config;
pub mod eval;
pub mod experiments;
pub mod fits;
pub mod report;
pub mod runtime;

pub use config::ExperimentConfig;
pub use eval::{evaluate_mse, MseStat, Problem, TestSet};
pub use experiments::{experiment_a, experiment_b, ExperimentA, ExperimentB};
pub use report::{MseReport, MseRow, RuntimeRow};
pub use runtime::{measure_runtime, RuntimeReport};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] gsp_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}
