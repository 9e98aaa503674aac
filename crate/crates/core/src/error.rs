use thiserror::Error;

/// Errors surfaced by the numeric layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix carries no subsystem shape")]
    MissingShape,
    #[error("subsystem index {index} out of range for {parties} parties")]
    BadSubsystem { index: usize, parties: usize },
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("matrix is not unitary: defect {defect:.3e} exceeds {tol:.3e}")]
    NotUnitary { defect: f64, tol: f64 },
    #[error("not a density matrix: {0}")]
    NotAState(String),
    #[error("eigensolver failed to converge after {sweeps} sweeps (off-norm {off:.3e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("dimension {dim} exceeds the dense-path limit {limit}")]
    TooLarge { dim: usize, limit: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("structure mismatch: {0}")]
    Structure(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
