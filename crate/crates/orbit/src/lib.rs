//! Periodic orbits and Floquet bundles as zeros of a graded spectral map.
//!
//! The unknown is a finite jet of Fourier sequences: order 0 is the orbit,
//! order 1 a tangent bundle scaled by its Floquet exponent, and higher
//! orders (used by the manifold stages) follow the same pattern. Each
//! grading block pairs its sequences with the scalars introduced at that
//! order (`omega` and optional unfolding parameters at order 0, `lambda`
//! at order 1) and with one scalar row per scalar column, so the map is
//! square and its Jacobian is block lower triangular in the grading.
//!
//! The crate splits into a floating-point layer and a certified layer:
//! [`setup`] seeds unknown vectors from integrated trajectories,
//! [`newton`] refines them stage by stage in ordinary arithmetic, and
//! [`validate`] runs the interval Newton-Kantorovich argument that turns a
//! refined vector into an existence certificate with an explicit error
//! radius.

use thiserror::Error;

pub mod finseq;
pub mod newton;
pub mod problem;
pub mod setup;
pub mod validate;

pub use finseq::{FinSeq, FtStack};
pub use newton::{
    newton_stage, residual, seq_of, solve_all_stages, stacks_of, store_seq, NewtonOptions,
};
pub use problem::{
    bundle_norm_row, energy_row, phase_row, radial_constraint_row, Layout, ScalarRow,
    SpectralProblem, Unfolding,
};
pub use setup::{
    attach_bundle, hill_orbit, orbit_from_shooting, orbit_from_symbols, BundleSeed, BundleSide,
    OrbitSeed,
};
pub use validate::{inverse_defect_ub, validate, CertifiedOrbit, ComponentBounds, ValidateOptions};

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Seq(#[from] seqspace::SeqError),
    #[error(transparent)]
    Float(#[from] numerics::NumericsError),
}
