use thiserror::Error;

/// Crate-wide error type. Variants are grouped by how the CLI reports them:
/// input problems exit 2, validation failures exit 3, numerical
/// non-convergence exits 4.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid arc partition: {0}")]
    InvalidArcs(String),
    #[error("invalid Blaschke product: {0}")]
    InvalidBlaschke(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("arity mismatch: expected {expected} circle zeros, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("cusp count mismatch: expected {expected}, found {found}")]
    RootCountMismatch { expected: usize, found: usize },
    #[error("no convergence after {iters} iterations (residual {residual:.3e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("orthogonality violated at vertex {vertex}: {detail}")]
    OrthogonalityViolation { vertex: usize, detail: String },
    #[error("boundary data does not close up around the loop (gap {gap:.3e})")]
    LoopClosure { gap: f64 },
    #[error("infeasible boundary value: lower obstacle exceeds upper by {excess:.3e}")]
    InfeasibleObstacles { excess: f64 },
    #[error("non-univalent configuration: {0}")]
    NonUnivalent(String),
    #[error("excessive curl residual {found:.3e} exceeds bound {bound:.3e}")]
    ExcessiveCurl { found: f64, bound: f64 },
    #[error("calibration failed to converge (residual {residual:.3e})")]
    CalibrationFailure { residual: f64 },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 input error, 3 validation failure, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidPolygon(_) | InvalidArcs(_) | InvalidBlaschke(_) | Domain(_) | Pole(_)
            | Singularity(_) | ArityMismatch { .. } | Io(_) | Json(_) => 2,
            RootCountMismatch { .. }
            | OrthogonalityViolation { .. }
            | LoopClosure { .. }
            | InfeasibleObstacles { .. }
            | NonUnivalent(_)
            | ExcessiveCurl { .. }
            | Validation(_) => 3,
            NonConvergence { .. } | CalibrationFailure { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
