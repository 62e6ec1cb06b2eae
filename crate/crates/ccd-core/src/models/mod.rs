//! Shipped problem instances: the cubic-regularized Newton subproblem (with
//! an eigenvalue mode), penalized orthogonal matrix factorization, and a
//! quadratic-plus-concave synthetic used by the test suites.

pub mod cubic;
pub mod mf;
pub mod sparse;
pub mod synthetic;

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NotSquare { rows: usize, len: usize },
    /// Relative asymmetry above 1e-12.
    AsymmetricMatrix { error: f64 },
    NonFiniteData,
    InvalidRegularization { value: f64 },
    InvalidRank { r: usize, m: usize, n: usize },
    InvalidPenalty { value: f64 },
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NotSquare { rows, len } => {
                write!(f, "matrix with {len} entries is not {rows}x{rows}")
            }
            ModelError::AsymmetricMatrix { error } => {
                write!(f, "matrix asymmetry {error} exceeds 1e-12")
            }
            ModelError::NonFiniteData => write!(f, "model data contains non-finite entries"),
            ModelError::InvalidRegularization { value } => {
                write!(f, "regularization weight {value} must be positive")
            }
            ModelError::InvalidRank { r, m, n } => {
                write!(f, "inner dimension {r} exceeds min({m}, {n})")
            }
            ModelError::InvalidPenalty { value } => {
                write!(f, "penalty weight {value} must be positive")
            }
            ModelError::DimensionMismatch { expected, got } => {
                write!(f, "dimension {got}, expected {expected}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}
