//! Error type shared by all modules.

use thiserror::Error;

/// Errors surfaced by the library API.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A matrix claimed Hermitian exceeds the Hermiticity tolerance.
    #[error("matrix is not Hermitian: defect {defect:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { defect: f64, tolerance: f64 },

    /// The QL iteration budget was exhausted before an eigenvalue converged.
    #[error("eigensolver failed to converge for eigenvalue index {index} after {iterations} iterations")]
    NoConvergence { index: usize, iterations: usize },

    /// Two operands have incompatible dimensions.
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimMismatch { left: usize, right: usize },

    /// Device constants violate their positivity constraints.
    #[error("invalid device input: {0}")]
    InvalidDevice(String),

    /// The (S,S) cofactor of the coefficient matrix is numerically zero, so
    /// det(a) = 0 does not constrain a_SS (the coupling ratio sits on a
    /// feasibility boundary).
    #[error("degenerate (S,S) minor: |cofactor| = {cofactor:.3e}; a_SS is unconstrained by det(a) = 0")]
    DegenerateMinor { cofactor: f64 },

    /// Lindblad extraction requires a completed (positive semidefinite)
    /// coefficient matrix.
    #[error("coefficient matrix is not completed (min eigenvalue {min_eigenvalue:.3e})")]
    NotCompleted { min_eigenvalue: f64 },

    /// An initial state places too much weight near the truncation edge.
    #[error("state occupies the top levels of the truncated basis (weight {weight:.3e} in the top 10%)")]
    OutOfBasis { weight: f64 },

    /// Time evolution blew up.
    #[error("trajectory diverged at step {step}: ||rho||_F = {norm:.3e}")]
    Diverged { step: usize, norm: f64 },

    /// Validation failure for a user-supplied value.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
