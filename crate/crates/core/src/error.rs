use thiserror::Error;

/// Failures raised by grids, operators and solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field does not belong to this grid")]
    GridMismatch,

    #[error("field length {got} does not match node/edge count {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{solver} did not converge in {iterations} iterations (final residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("{solver}: line search failed at iteration {iteration} (residual {residual:e})")]
    LineSearchFailed {
        solver: &'static str,
        iteration: usize,
        residual: f64,
    },

    #[error("fixed-point iteration stagnated (damping {damping:e}, best residual {residual:e})")]
    Stagnation { damping: f64, residual: f64 },

    #[error("time step could not be completed: substep {delta:e} below floor {floor:e}")]
    SubstepFloor { delta: f64, floor: f64 },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("snapshot parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
