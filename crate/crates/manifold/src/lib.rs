//! Local stable and unstable manifolds of validated periodic orbits,
//! represented as Fourier-Taylor parameterizations and certified to all
//! Taylor orders.
//!
//! The orbit crate certifies a finite jet: the cycle, one Floquet bundle,
//! and optionally a few higher Taylor orders, with one error radius for the
//! coupled finite system. This crate completes the picture. [`extend`]
//! grows a certified orbit-and-bundle jet to any requested Taylor order by
//! solving the linear higher-order stages and steering the free Taylor
//! scale, [`tail`] bounds the infinitely many remaining orders through a
//! contraction on the weighted tail space, and [`eval`] turns the
//! coefficient data back into points, whisker curves, and conjugacy
//! diagnostics.
//!
//! A complete manifold certificate is the pair of radii `(r_jet, r_tail)`:
//! the true parameterization agrees with the stored jet to within `r_jet`
//! per grading slot on the retained orders, and the sum of all discarded
//! orders has weighted norm at most `r_tail` on the unit Taylor disk.

use thiserror::Error;

pub mod eval;
pub mod extend;
pub mod tail;

pub use eval::{conjugacy_defect, eval_state, invariance_residual};
pub use extend::{extend_to_order, rescale_taylor, ExtendOptions, ExtendedJet};
pub use tail::{tail_radius, TailBounds, TailOptions};

use nalgebra::DVector;
use num_complex::Complex64;
use orbit::{validate, CertifiedOrbit, OrbitError, SpectralProblem, ValidateOptions};

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Seq(#[from] seqspace::SeqError),
}

/// Joint certificate for a Fourier-Taylor parameterization: the finite-jet
/// enclosure and the tail contraction.
#[derive(Clone, Debug)]
pub struct ManifoldCertificate {
    /// Finite coupled validation of the retained orders.
    pub finite: CertifiedOrbit,
    /// Contraction bounds for all orders beyond the jet.
    pub tail: TailBounds,
    /// Uniform bound on the defect between the true parameterization and
    /// the stored jet over the unit Taylor disk, when both stages succeed:
    /// the per-slot jet radius summed over retained orders plus the tail
    /// radius.
    pub c0_error: Option<f64>,
}

impl ManifoldCertificate {
    pub fn success(&self) -> bool {
        self.c0_error.is_some()
    }
}

/// Validate the retained orders as one coupled system and then close the
/// tail, composing the two radii into a uniform enclosure.
pub fn validate_manifold(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    vopts: &ValidateOptions,
    topts: &TailOptions,
) -> Result<ManifoldCertificate, ManifoldError> {
    let finite = validate(p, x, vopts)?;
    if finite.r.is_none() {
        return Err(ManifoldError::Validation(format!(
            "finite jet rejected: {}",
            finite.verdict.diagnostics
        )));
    }
    let tail = tail_radius(p, x, &finite, topts)?;
    let c0_error = match (finite.r, tail.r_inf) {
        (Some(rj), Some(rt)) => Some(p.orders as f64 * rj + rt),
        _ => None,
    };
    Ok(ManifoldCertificate { finite, tail, c0_error })
}
