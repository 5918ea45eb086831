use thiserror::Error;

use crate::space::Point;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible triangle: side lengths ({0}, {1}, {2}) violate the triangle inequality")]
    InfeasibleTriangle(f64, f64, f64),

    #[error("point is not a fixed point of the operator (displacement {0:e})")]
    NotAFixedPoint(f64),

    #[error("barycenter did not converge after {sweeps} sweeps (objective {objective:e}, last step {step:e})")]
    ConvergenceFailure { sweeps: usize, objective: f64, step: f64, last: Box<Point> },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid check spec: {0}")]
    Spec(String),

    #[error("iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
