//! Rectangular complex intervals: a box `re x im` in the complex plane.

use crate::interval::RInterval;
use crate::DomainError;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A complex box `{ x + iy : x in re, y in im }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CInterval {
    pub re: RInterval,
    pub im: RInterval,
}

pub const ZERO: CInterval = CInterval { re: RInterval::ZERO, im: RInterval::ZERO };
pub const ONE: CInterval = CInterval { re: RInterval::ONE, im: RInterval::ZERO };

impl CInterval {
    pub const ZERO: CInterval = ZERO;
    pub const ONE: CInterval = ONE;

    pub fn new(re: RInterval, im: RInterval) -> Self {
        CInterval { re, im }
    }

    pub fn point(z: Complex64) -> Self {
        CInterval { re: RInterval::point(z.re), im: RInterval::point(z.im) }
    }

    pub fn real(re: RInterval) -> Self {
        CInterval { re, im: RInterval::ZERO }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::real(RInterval::point(x))
    }

    pub fn mid(self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    pub fn contains(self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    pub fn contains_interval(self, o: CInterval) -> bool {
        self.re.contains_interval(o.re) && self.im.contains_interval(o.im)
    }

    pub fn hull(self, o: CInterval) -> Self {
        CInterval { re: self.re.hull(o.re), im: self.im.hull(o.im) }
    }

    pub fn conj(self) -> Self {
        CInterval { re: self.re, im: self.im.neg() }
    }

    pub fn neg(self) -> Self {
        CInterval { re: self.re.neg(), im: self.im.neg() }
    }

    /// Multiplication by the imaginary unit: exact rotation of the box.
    pub fn mul_i(self) -> Self {
        CInterval { re: self.im.neg(), im: self.re }
    }

    pub fn add(self, o: CInterval) -> Self {
        CInterval { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    pub fn sub(self, o: CInterval) -> Self {
        CInterval { re: self.re.sub(o.re), im: self.im.sub(o.im) }
    }

    pub fn mul(self, o: CInterval) -> Self {
        CInterval {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    pub fn mul_real(self, c: RInterval) -> Self {
        CInterval { re: self.re.mul(c), im: self.im.mul(c) }
    }

    pub fn scale(self, c: f64) -> Self {
        self.mul_real(RInterval::point(c))
    }

    /// Upper bound for `|z|^2` (interval of the squared modulus).
    pub fn mod_sq(self) -> RInterval {
        self.re.square().add(self.im.square())
    }

    /// Rigorous upper bound for `sup |z|` over the box.
    pub fn mod_ub(self) -> f64 {
        self.mod_sq().hi.sqrt().next_up()
    }

    /// Rigorous lower bound for `inf |z|` over the box (distance to origin).
    pub fn mod_lb(self) -> f64 {
        let d2 = (self.re.mig() * self.re.mig()).next_down().max(0.0)
            + (self.im.mig() * self.im.mig()).next_down().max(0.0);
        d2.next_down().max(0.0).sqrt().next_down().max(0.0)
    }

    /// Enclosure of `|z|` combining both bounds.
    pub fn modulus(self) -> RInterval {
        RInterval::new(self.mod_lb(), self.mod_ub())
    }

    /// Reciprocal via `conj(z) / |z|^2`; fails when the box may contain zero.
    pub fn recip(self) -> Result<Self, DomainError> {
        let m2 = self.mod_sq();
        if m2.lo <= 0.0 || self.mod_lb() <= 0.0 {
            return Err(DomainError("reciprocal of a complex box that may contain zero".into()));
        }
        // Sharper |z|^2 lower bound: mod_lb squared.
        let lb = self.mod_lb();
        let m2 = RInterval::new((lb * lb).next_down().max(f64::MIN_POSITIVE), m2.hi);
        let c = self.conj();
        Ok(CInterval { re: c.re.div(m2)?, im: c.im.div(m2)? })
    }

    pub fn div(self, o: CInterval) -> Result<Self, DomainError> {
        Ok(self.mul(o.recip()?))
    }

    pub fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Upper bound for the modulus of a complex box (spec-level op name).
pub fn cmod_ub(z: CInterval) -> f64 {
    z.mod_ub()
}
