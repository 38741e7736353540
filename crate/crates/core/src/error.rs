use thiserror::Error;

/// Errors produced by curvature-tensor and operator computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("invariant violation in {context}: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    InvariantViolation {
        context: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("matrix is not unitary: residual {0:.3e}")]
    NotUnitary(f64),

    #[error("not a curvature-operator matrix: least-squares residual {0:.3e}")]
    NotCurvatureMatrix(f64),

    #[error("scalar curvature must be positive, got {0}")]
    NonPositiveScalar(f64),

    #[error("conflicting tensor components at ({i},{j},{k},{l}): difference {delta:.3e}")]
    ComponentConflict {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        delta: f64,
    },

    #[error("component index out of range at ({i},{j},{k},{l}) for n={n}")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        n: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
