//! Outward-rounded interval arithmetic and enclosure linear algebra.
//!
//! Every arithmetic routine here returns an enclosure: an interval (or box,
//! or disc) guaranteed to contain the exact mathematical result for every
//! selection of points from its operands. Native IEEE-754 operations round
//! to nearest, so each native result is pushed outward by one ulp on the
//! relevant side; no floating-point environment switching is required, and
//! the guarantees survive arbitrary compiler optimization.

pub mod complex;
pub mod hexfloat;
pub mod mat;
pub mod interval;
pub mod trig;

pub use complex::{cmod_ub, CInterval};
pub use interval::{iv_add, iv_div, iv_mul, RInterval};
pub use mat::Mat;

use thiserror::Error;

/// Mathematical domain violation: division by an interval containing zero,
/// square root or logarithm of an interval reaching non-positive values, and
/// the like.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("domain violation: {0}")]
pub struct DomainError(pub String);

/// Verifies that scalar outward rounding behaves as the enclosures assume.
///
/// Returns an error description if any probe fails. Intended for a strict
/// startup check: the probes would only fail on hardware or build
/// configurations that break IEEE-754 semantics.
pub fn rounding_self_test() -> Result<(), String> {
    let third = RInterval::point(1.0).div(RInterval::point(3.0)).map_err(|e| e.to_string())?;
    if !(third.lo < third.hi) {
        return Err("1/3 enclosure did not widen".into());
    }
    if !(third.lo < 0.333_333_333_333_333_4 && third.hi > 0.333_333_333_333_333_2) {
        return Err("1/3 enclosure misses the true value".into());
    }
    let tiny = RInterval::point(f64::MIN_POSITIVE);
    let sq = tiny.square();
    if sq.hi <= 0.0 {
        return Err("underflowed square lost its upper bound".into());
    }
    let one_eps = RInterval::point(1.0).add(RInterval::point(f64::EPSILON / 4.0));
    if one_eps.hi <= 1.0 {
        return Err("addition failed to round the upper endpoint outward".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_test_passes() {
        rounding_self_test().unwrap();
    }
}
