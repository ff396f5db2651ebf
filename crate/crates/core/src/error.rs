use thiserror::Error;

/// Errors produced by the estimation and linear-algebra routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric: skew norm {skew:.3e} exceeds limit {limit:.3e}")]
    NotSymmetric { skew: f64, limit: f64 },

    #[error("eigenvalue iteration failed to converge (off-diagonal residual {residual:.3e})")]
    EigenNoConvergence { residual: f64 },

    #[error(
        "secular solve did not converge after {iterations} iterations \
         (last iterate {last:.17e}, residual {residual:.3e})"
    )]
    SecularNoConvergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("secular update lost consistency: a^2 - 4b = {value:.3e} < 0")]
    SecularInconsistent { value: f64 },

    #[error("eigenvalue {lambda:.17e} is too close to pole {pole:.17e}")]
    PoleCollision { lambda: f64, pole: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigval:.3e})")]
    NotPsd { min_eigval: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("batch size {batch} exceeds the number of ordered pairs {pairs}")]
    BatchTooLarge { batch: usize, pairs: usize },

    #[error("estimate diverged at iteration {iteration}")]
    Diverged { iteration: usize },

    #[error("{0}")]
    Domain(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
