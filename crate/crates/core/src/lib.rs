//! Covariance-matrix toolkit for Gaussian assisted resource concentration.
//!
//! Everything works at the level of quantum covariance matrices (QCMs):
//! symplectic linear algebra ([`symplectic`]), Gaussian measurement and
//! channel dynamics ([`gaussian`]), the resource theory of squeezing
//! ([`squeezing`]), Gaussian entanglement monotones and their assisted
//! values ([`entanglement`]), and an independent derivative-free optimizer
//! that cross-checks every closed form ([`oracle`]).

pub mod entanglement;
pub mod error;
pub mod gaussian;
pub mod layout;
pub mod oracle;
pub mod squeezing;
pub mod symplectic;
pub mod verify;

mod linalg;
mod rng;

pub use error::{Error, Result};
pub use layout::{make_omega, ModeLayout, QuadratureOrder};
pub use symplectic::{
    euler_compose, random_qcm, random_symplectic, schur_complement,
    schur_complement_with_fallback, EulerDecomposition, Qcm, SchurComplement, SymplecticMatrix,
    WilliamsonDecomposition, DEFAULT_DECOMP_TOL, DEFAULT_SYMPLECTIC_TOL, DEFAULT_VALIDITY_TOL,
};

pub use entanglement::{GlemsParams, LogBase, MonotoneF, StandardForm2Mode};
pub use gaussian::{GaussianChannel, GaussianState, MeasurementSeed, Partition};
pub use oracle::{AssistObjective, OptResult, OptimizerConfig, RestartTrace};
pub use squeezing::{PureLowerBoundCertificate, SqueezingReport};
pub use verify::CriterionReport;
