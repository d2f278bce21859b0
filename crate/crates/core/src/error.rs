use thiserror::Error;

use crate::stepper::IterationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Invalid grid, step or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Coefficient data outside its admissible range (e.g. negative diffusion).
    #[error("data error: {0}")]
    Data(String),

    /// Mismatched shapes or time levels between inputs.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Time step violates the monotonicity conditions.
    #[error("stability error: {0}")]
    Stability(String),

    #[error("linear solver error: {0}")]
    Solver(String),

    #[error("outer iteration did not converge after {} iterations", .0.iterations)]
    NonConvergence(Box<IterationReport>),

    #[error("limiter program infeasible at row {0}")]
    Infeasible(usize),
}
