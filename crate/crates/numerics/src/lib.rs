//! Non-rigorous floating-point companions to the certified pipeline:
//! adaptive ODE integration, FFT and Chebyshev fitting, monodromy and
//! Floquet seeds, and shooting refinements.
//!
//! Nothing here carries rigor. Outputs enter the certified path only as
//! Newton seeds or as approximate inverses that the rigorous code
//! re-encloses in intervals before use; tests use these routines as
//! independent cross-check oracles.

pub mod fit;
pub mod floquet;
pub mod ode;
pub mod shoot;

pub use fit::{eval_chebyshev, fit_chebyshev, fit_fourier, ChebyshevFit, FourierFit};
pub use floquet::{bundle_samples, eigen_decompose, monodromy, transition_matrix, EigenPair, JacEval};
pub use ode::{
    flow_to_event, integrate, integrate_rhs, integrate_sampled, rkf78_step, EventHit, FieldEval,
    FloatTrajectory,
};
pub use shoot::{hill_lyapunov, hill_section_state, seed_by_symbols, shoot_periodic, SymbolSeed};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("iteration limit: {0}")]
    MaxIterations(String),
    #[error("seeding failed: {0}")]
    Seed(String),
}

impl From<field::FieldError> for NumericsError {
    fn from(e: field::FieldError) -> Self {
        NumericsError::Numerical(e.to_string())
    }
}
