use thiserror::Error;

/// Errors raised by the linear-algebra primitives and the oracles built on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not normal (commutator norm {0:.3e})")]
    NotNormal(f64),

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0} did not converge")]
    NoConvergence(&'static str),

    #[error("map is not unital (residual {0:.3e})")]
    NotUnital(f64),

    #[error("map is not completely positive (Choi eigenvalue floor {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("inconsistent linear constraints (residual {0:.3e})")]
    InconsistentConstraints(f64),

    #[error("objective is unbounded")]
    Unbounded,

    #[error("NaN encountered in {0}")]
    NaN(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
