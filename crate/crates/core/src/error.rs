use thiserror::Error;

/// Errors produced by the covariance-matrix toolkit.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`])
/// so front ends can report failures without parsing messages.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not symmetric (max asymmetry {asymmetry:.3e}, tolerance {tol:.3e})")]
    NotSymmetric { asymmetry: f64, tol: f64 },

    #[error("matrix is not positive definite (minimal eigenvalue {min_eig:.6e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("not a valid quantum covariance matrix (minimal symplectic eigenvalue {min_nu:.9})")]
    InvalidQcm { min_nu: f64 },

    #[error("matrix is not symplectic (defect {defect:.3e}, tolerance {tol:.3e})")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("state is not pure (symplectic eigenvalue deviates from 1 by {defect:.3e})")]
    NotPure { defect: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("eliminated block is singular and no pseudo-inverse fallback was requested")]
    SingularBlock,

    #[error("monotone profile must be concave for this operation")]
    NonConcaveMonotone,

    #[error("invalid monotone table: {0}")]
    InvalidTable(String),

    #[error("optimizer could not recover a feasible point: {0}")]
    Infeasible(String),

    #[error("{0} copies exceed the supported regularization budget (max 2)")]
    UnsupportedCopies(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSymmetric { .. } => "ASYMMETRIC",
            Error::NotPositiveDefinite { .. } => "NOT_POSITIVE_DEFINITE",
            Error::InvalidQcm { .. } => "INVALID_QCM",
            Error::NotSymplectic { .. } => "NOT_SYMPLECTIC",
            Error::NotPure { .. } => "NOT_PURE",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::IndexOutOfRange(_) => "INDEX_RANGE",
            Error::ParameterRange(_) => "PARAMETER_RANGE",
            Error::SingularBlock => "SINGULAR_BLOCK",
            Error::NonConcaveMonotone => "NON_CONCAVE",
            Error::InvalidTable(_) => "INVALID_TABLE",
            Error::Infeasible(_) => "INFEASIBLE",
            Error::UnsupportedCopies(_) => "UNSUPPORTED_COPIES",
            Error::Numerical(_) => "NUMERICAL",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
