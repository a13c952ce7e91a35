//! Polynomial vector fields stored as data.
//!
//! A field is a list of monomial sums, one per component. Storing the
//! monomials rather than code gives a single evaluation path for every
//! coefficient algebra in the project: point values, interval boxes,
//! weighted Fourier sequences, and Taylor-graded series all evaluate the
//! same data through the [`CoeffAlgebra`] trait. Jacobians are computed by
//! exact symbolic differentiation of the monomials.
//!
//! The two built-in systems live in [`systems`]: the classic quadratic
//! three-dimensional flow and a five-dimensional polynomial embedding of a
//! restricted four-body problem whose radical nonlinearity is traded for an
//! extra variable plus an algebraic constraint on initial conditions.

pub mod algebra;
pub mod poly;
pub mod problem;
pub mod systems;

pub use algebra::CoeffAlgebra;
pub use poly::{
    apply_field, eval_monomials, jacobian, norm_inflation_coeffs, Monomial,
    PolynomialVectorField, PowTable,
};
pub use problem::ProblemDef;
pub use systems::{hill_embedded, lorenz, HillSystem};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain violation: {0}")]
    Domain(String),
}

impl From<seqspace::SeqError> for FieldError {
    fn from(e: seqspace::SeqError) -> Self {
        match e {
            seqspace::SeqError::Usage(m) => FieldError::Usage(m),
            seqspace::SeqError::Domain(m) => FieldError::Domain(m),
        }
    }
}

impl From<rigor::DomainError> for FieldError {
    fn from(e: rigor::DomainError) -> Self {
        FieldError::Domain(e.to_string())
    }
}
