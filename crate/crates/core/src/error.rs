use alloc::string::String;

/// Errors raised by operator construction, spectral analysis and dynamics.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("capacity exceeded: dimension {dim} is larger than {max}")]
    Capacity { dim: usize, max: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max entrywise deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix or vector has a non-finite entry")]
    NonFinite,
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error(
        "eigensolver did not converge (dim {dim}, frobenius norm {norm:e}, \
         hermiticity defect {asymmetry:e})"
    )]
    EigenNonConvergence { dim: usize, norm: f64, asymmetry: f64 },
    #[error("degenerate spectrum: levels {first}..={last} lie within {spread:e}")]
    Degenerate { first: usize, last: usize, spread: f64 },
    #[error("eigenvector tracking lost at level {level}: overlap {overlap:.3e}")]
    TrackingLoss { level: usize, overlap: f64 },
    #[error("level crossing between frames: level {level} now overlaps level {partner}")]
    LevelCrossing { level: usize, partner: usize },
    #[error(
        "counterdiabatic term diverges: levels {l} and {m} have gap {gap:e} \
         with coupling {coupling:e}"
    )]
    Divergence { l: usize, m: usize, gap: f64, coupling: f64 },
    #[error("singular {what}")]
    Singular { what: &'static str },
    #[error("integration failed: norm drift {drift:e} exceeds {limit:e}; reduce the step")]
    Integration { drift: f64, limit: f64 },
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn argument(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}
