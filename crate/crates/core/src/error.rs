use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("unphysical state: {constraint}")]
    Unphysical { constraint: String },

    #[error("xi = {xi} outside the physical range [-1, 0]")]
    XiOutOfRange { xi: f64 },

    #[error(
        "state derivative has weight {value:.3e} at element ({row}, {col}) outside the support of the state; the quantum Fisher information diverges"
    )]
    SupportViolation { row: usize, col: usize, value: f64 },

    #[error("Hamiltonian is not diagonal (max off-diagonal {0:.3e}); diagonalize it first")]
    NonDiagonalHamiltonian(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid probability data: {0}")]
    Probabilities(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive and finite",
        })
    }
}
