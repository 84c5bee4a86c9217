use thiserror::Error;

use crate::sparsela::SolveReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value lies outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Jacobi preconditioning needs every diagonal entry nonzero.
    #[error("zero diagonal entry in row {row}; Jacobi preconditioner undefined")]
    ZeroDiagonal { row: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(
        "conjugate gradient did not converge: {} iterations, relative residual {:.3e}",
        .0.iterations,
        .0.final_relative_residual
    )]
    NotConverged(SolveReport),

    /// A time step failed; `step` is the 1-based index of the step being computed.
    #[error("time step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True when the failure traces back to a linear solve that ran out of iterations.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NotConverged(_) => true,
            Error::Step { source, .. } => source.is_solver_failure(),
            _ => false,
        }
    }

    pub fn is_argument_error(&self) -> bool {
        match self {
            Error::Domain(_) | Error::InvalidArgument(_) => true,
            Error::Step { source, .. } => source.is_argument_error(),
            _ => false,
        }
    }
}
