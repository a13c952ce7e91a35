//! Weighted sequence spaces for rigorous Fourier and Taylor computations.
//!
//! The central objects are bi-infinite coefficient sequences with finite
//! support, measured in the weighted norm `sum_k |a_k| nu^|k|` for a weight
//! `nu >= 1`. Under this norm the discrete convolution is a Banach algebra
//! product, which is what lets polynomial vector fields act on coefficient
//! data with controlled norm growth. Taylor-graded stacks of sequences model
//! two-variable (angle and disk) expansions, and eventually-diagonal
//! operators capture the linear maps whose finite block is stored explicitly
//! while the tail acts diagonally.
//!
//! Everything here is enclosure arithmetic: coefficients are complex
//! intervals and every norm or operator bound is an interval whose upper
//! endpoint is safe to use in a proof.

pub mod evdiag;
pub mod ft;
pub mod seq;

pub use evdiag::{
    recip_linear_inf_den_lb, recip_linear_modescaled_sup_ub, recip_linear_sup_ub,
    EventuallyDiagonalOp, TailRule,
};
pub use ft::{
    cauchy_bound_fourier, cauchy_bound_taylor, cc_prod, norm_1nu_modescaled, truncate,
    FourierTaylorSeries,
};
pub use seq::{conv, norm_1nu, norm_inf_dual, weights, Symmetry, WeightedSequence};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SeqError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain violation: {0}")]
    Domain(String),
}
