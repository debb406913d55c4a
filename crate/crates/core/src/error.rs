use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} = {value} is out of range [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: usize,
        min: usize,
        max: usize,
    },

    #[error("graph is not connected (lambda_2 = {lambda2:e})")]
    Disconnected { lambda2: f64 },

    #[error("perturbation infeasible: {0}")]
    PerturbationInfeasible(String),

    #[error("unstable filter: denominator {value:e} at graph frequency {index} is within {tol:e} of zero")]
    UnstableFilter { index: usize, value: f64, tol: f64 },

    #[error("invalid filter: {0}")]
    InvalidFilter(String),

    #[error("singular moments: {0}")]
    SingularMoments(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::DimensionMismatch { expected, got }
    }

    /// True for failures caused by the numbers rather than by the inputs'
    /// shape or syntax.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Disconnected { .. }
                | Error::UnstableFilter { .. }
                | Error::SingularMoments(_)
                | Error::PerturbationInfeasible(_)
        )
    }
}
