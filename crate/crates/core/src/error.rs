use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value while evaluating {0}")]
    Evaluation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("linear solver failure: {0}")]
    LinearSolver(String),

    #[error("nonlinear solver did not converge after {iterations} iterations (last residual {last_residual:.3e})")]
    NotConverged {
        iterations: usize,
        last_residual: f64,
        history: Vec<ResidualRecord>,
    },

    #[error("condition violated: {0}")]
    ConditionViolated(String),

    #[error("state solve failed for perturbed control DOF {dof}: {source}")]
    PerturbedSolve {
        dof: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("optimization aborted at iteration {iteration}: {source}")]
    OptimizationAborted {
        iteration: usize,
        history: Vec<crate::optimize::CostRecord>,
        #[source]
        source: Box<Error>,
    },

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code of the command-line driver: 2 for configuration
    /// errors, 3 for solver failures, 4 for failed verifications, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => 2,
            Error::Evaluation(_)
            | Error::LinearSolver(_)
            | Error::NotConverged { .. }
            | Error::PerturbedSolve { .. }
            | Error::OptimizationAborted { .. } => 3,
            Error::ConditionViolated(_) | Error::Verification(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

/// One row of a solver residual history.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResidualRecord {
    pub iteration: usize,
    pub velocity: f64,
    pub divergence: f64,
}

impl ResidualRecord {
    pub fn combined(&self) -> f64 {
        self.velocity + self.divergence
    }
}

pub type Result<T> = std::result::Result<T, Error>;
