//! Dense complex linear algebra and exact propagation of linear
//! time-invariant systems.

mod eigen;
mod matrix;
mod propagate;

pub use eigen::{general_eig, hermitian_eig, EigenSystem};
pub use matrix::{ComplexMatrix, C64};
pub use propagate::{expm, propagate_spectral, rk4_propagate, PropagationMethod, Propagator};

use thiserror::Error;

/// Largest matrix dimension accepted by the eigensolvers.
pub const MAX_DIMENSION: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian: max|A - A†| = {deviation:.3e} (max|A| = {scale:.3e})")]
    NotHermitian { deviation: f64, scale: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("eigen residual {residual:.3e} exceeds bound {bound:.1e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("dimension {dim} exceeds supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("invalid propagation time {0}")]
    InvalidTime(f64),
    #[error("non-finite matrix entries")]
    NonFinite,
}

/// Numerical tolerances shared by the solvers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative Hermiticity tolerance, `max|A - A†| / max|A|`.
    pub hermitian: f64,
    /// Relative eigen residual bound, `max|AV - VΛ| / max|A|`.
    pub eigen_residual: f64,
    /// Orthonormality tolerance for Hermitian eigenvectors.
    pub orthonormal: f64,
    /// Eigenvector condition number above which a system counts as
    /// ill-conditioned.
    pub condition_limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-12,
            eigen_residual: 1e-9,
            orthonormal: 1e-10,
            condition_limit: 1e12,
        }
    }
}
