//! Closed real intervals `[lo, hi]` with outward rounding.
//!
//! A native round-to-nearest result differs from the exact value by at most
//! half an ulp, so stepping one ulp outward yields a true bound. Operations
//! that combine several native results first take the relevant min/max of the
//! rounded-to-nearest candidates and then step outward once; the candidate
//! chosen by min/max is within one ulp of the exact extremum, so a single
//! step still suffices.

use crate::DomainError;
use serde::{Deserialize, Serialize};

/// A closed interval of reals, `lo <= hi`, both finite unless an operation
/// overflowed (in which case an infinite endpoint is still a valid bound).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RInterval {
    pub lo: f64,
    pub hi: f64,
}

pub const ZERO: RInterval = RInterval { lo: 0.0, hi: 0.0 };
pub const ONE: RInterval = RInterval { lo: 1.0, hi: 1.0 };

impl RInterval {
    pub const ZERO: RInterval = ZERO;
    pub const ONE: RInterval = ONE;

    /// Interval with the given endpoints. Panics if `lo > hi` or either is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        RInterval { lo, hi }
    }

    /// The degenerate interval `[x, x]`.
    pub fn point(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN is not a valid interval endpoint");
        RInterval { lo: x, hi: x }
    }

    /// Exact conversion of an integer (|i| must stay below 2^53).
    pub fn from_i64(i: i64) -> Self {
        debug_assert!(i.unsigned_abs() < (1u64 << 53));
        Self::point(i as f64)
    }

    /// Smallest interval containing both operands.
    pub fn hull(self, o: RInterval) -> Self {
        RInterval { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn intersect(self, o: RInterval) -> Option<Self> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(RInterval { lo, hi })
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(self, o: RInterval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    /// A point of the interval near its midpoint.
    pub fn mid(self) -> f64 {
        let m = 0.5 * (self.lo + self.hi);
        if m.is_finite() {
            m.clamp(self.lo, self.hi)
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    /// Upper bound on the diameter `hi - lo`.
    pub fn width(self) -> f64 {
        (self.hi - self.lo).next_up().max(0.0)
    }

    /// Magnitude: `sup |x|` over the interval. Exact.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Mignitude: `inf |x|` over the interval. Exact.
    pub fn mig(self) -> f64 {
        if self.lo <= 0.0 && 0.0 <= self.hi {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// `[|x|, |x|]` as an interval: `[mig, mag]`.
    pub fn abs(self) -> Self {
        RInterval { lo: self.mig(), hi: self.mag() }
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn neg(self) -> Self {
        RInterval { lo: -self.hi, hi: -self.lo }
    }

    fn is_exact_zero(self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn add(self, o: RInterval) -> Self {
        if self.is_exact_zero() {
            return o;
        }
        if o.is_exact_zero() {
            return self;
        }
        RInterval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    pub fn sub(self, o: RInterval) -> Self {
        if o.is_exact_zero() {
            return self;
        }
        if self.is_exact_zero() {
            return o.neg();
        }
        RInterval { lo: (self.lo - o.hi).next_down(), hi: (self.hi - o.lo).next_up() }
    }

    pub fn mul(self, o: RInterval) -> Self {
        if self.is_exact_zero() || o.is_exact_zero() {
            return RInterval::ZERO;
        }
        if self == RInterval::ONE {
            return o;
        }
        if o == RInterval::ONE {
            return self;
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let p1 = a * c;
        let p2 = a * d;
        let p3 = b * c;
        let p4 = b * d;
        RInterval {
            lo: p1.min(p2).min(p3).min(p4).next_down(),
            hi: p1.max(p2).max(p3).max(p4).next_up(),
        }
    }

    /// Multiplication by an exact scalar.
    pub fn scale(self, c: f64) -> Self {
        self.mul(RInterval::point(c))
    }

    pub fn div(self, o: RInterval) -> Result<Self, DomainError> {
        if o.lo <= 0.0 && 0.0 <= o.hi {
            return Err(DomainError(format!(
                "division by interval [{}, {}] containing zero",
                o.lo, o.hi
            )));
        }
        let (a, b, c, d) = (self.lo, self.hi, o.lo, o.hi);
        let q1 = a / c;
        let q2 = a / d;
        let q3 = b / c;
        let q4 = b / d;
        Ok(RInterval {
            lo: q1.min(q2).min(q3).min(q4).next_down(),
            hi: q1.max(q2).max(q3).max(q4).next_up(),
        })
    }

    pub fn recip(self) -> Result<Self, DomainError> {
        ONE.div(self)
    }

    /// Tight square: `[mig^2, mag^2]` outward-rounded, never negative.
    pub fn square(self) -> Self {
        let lo = self.mig();
        let hi = self.mag();
        RInterval { lo: (lo * lo).next_down().max(0.0), hi: (hi * hi).next_up() }
    }

    /// Integer power by binary exponentiation on `square` and `mul`.
    pub fn powi(self, n: u32) -> Self {
        match n {
            0 => ONE,
            1 => self,
            _ => {
                let half = self.powi(n / 2).square();
                if n.is_multiple_of(2) {
                    half
                } else {
                    half.mul(self)
                }
            }
        }
    }

    pub fn sqrt(self) -> Result<Self, DomainError> {
        if self.hi < 0.0 {
            return Err(DomainError(format!(
                "square root of negative interval [{}, {}]",
                self.lo, self.hi
            )));
        }
        let lo = self.lo.max(0.0);
        Ok(RInterval { lo: lo.sqrt().next_down().max(0.0), hi: self.hi.sqrt().next_up() })
    }

    /// Natural logarithm. The libm `ln` is within 1 ulp on this platform;
    /// three outward steps leave a wide safety margin.
    pub fn ln(self) -> Result<Self, DomainError> {
        if self.lo <= 0.0 {
            return Err(DomainError(format!(
                "logarithm of interval [{}, {}] reaching zero",
                self.lo, self.hi
            )));
        }
        Ok(RInterval { lo: steps_down(self.lo.ln(), 3), hi: steps_up(self.hi.ln(), 3) })
    }

    /// Exponential, with the same 3-ulp margin as `ln`.
    pub fn exp(self) -> Self {
        RInterval { lo: steps_down(self.lo.exp(), 3).max(0.0), hi: steps_up(self.hi.exp(), 3) }
    }

    /// Widens both endpoints outward by `eps >= 0`.
    pub fn inflate(self, eps: f64) -> Self {
        debug_assert!(eps >= 0.0);
        RInterval { lo: (self.lo - eps).next_down(), hi: (self.hi + eps).next_up() }
    }
}

pub(crate) fn steps_up(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = x.next_up();
    }
    x
}

pub(crate) fn steps_down(mut x: f64, n: usize) -> f64 {
    for _ in 0..n {
        x = x.next_down();
    }
    x
}

pub fn iv_add(a: RInterval, b: RInterval) -> RInterval {
    a.add(b)
}

pub fn iv_mul(a: RInterval, b: RInterval) -> RInterval {
    a.mul(b)
}

pub fn iv_div(a: RInterval, b: RInterval) -> Result<RInterval, DomainError> {
    a.div(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite")
    }

    fn contains_rat(iv: RInterval, v: &BigRational) -> bool {
        &rat(iv.lo) <= v && v <= &rat(iv.hi)
    }

    fn sample(rng: &mut ChaCha8Rng) -> RInterval {
        let scale = 10f64.powi(rng.gen_range(-12..13));
        let a = (rng.gen::<f64>() - 0.5) * scale;
        let b = a + rng.gen::<f64>() * scale * 1e-3;
        RInterval::new(a.min(b), a.max(b))
    }

    /// Containment against exact rational arithmetic, 10^4 random cases per op.
    #[test]
    fn field_ops_contain_exact_results() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..10_000 {
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let (px, py) = (
                rat(x.lo) + (rat(x.hi) - rat(x.lo)) * rat(rng.gen::<f64>()),
                rat(y.lo) + (rat(y.hi) - rat(y.lo)) * rat(rng.gen::<f64>()),
            );
            assert!(contains_rat(x.add(y), &(&px + &py)));
            assert!(contains_rat(x.sub(y), &(&px - &py)));
            assert!(contains_rat(x.mul(y), &(&px * &py)));
            assert!(contains_rat(x.square(), &(&px * &px)));
            if !py.is_zero() && y.mig() > 0.0 {
                assert!(contains_rat(x.div(y).unwrap(), &(&px / &py)));
            }
        }
    }

    #[test]
    fn division_by_zero_interval_is_rejected() {
        let err = RInterval::point(1.0).div(RInterval::new(-1.0, 2.0));
        assert!(err.is_err());
        assert!(RInterval::point(1.0).div(RInterval::new(1e-300, 1.0)).is_ok());
    }

    #[test]
    fn powi_contains_exact_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2_000 {
            let x = sample(&mut rng);
            let n = rng.gen_range(0u32..8);
            let p = rat(x.lo) + (rat(x.hi) - rat(x.lo)) * rat(rng.gen::<f64>());
            let mut exact = BigRational::from(BigInt::from(1));
            for _ in 0..n {
                exact *= &p;
            }
            assert!(contains_rat(x.powi(n), &exact), "x={x:?} n={n}");
        }
    }

    #[test]
    fn even_powers_stay_nonnegative() {
        let x = RInterval::new(-2.0, 3.0);
        assert!(x.square().lo >= 0.0);
        assert!(x.powi(4).lo >= 0.0);
    }

    #[test]
    fn sqrt_is_an_enclosure() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2_000 {
            let x = sample(&mut rng).abs();
            let s = x.sqrt().unwrap();
            // Exact check in rationals: s.lo^2 <= x.hi and s.hi^2 >= x.lo.
            assert!(rat(s.lo) * rat(s.lo) <= rat(x.hi));
            assert!(rat(s.hi) * rat(s.hi) >= rat(x.lo));
        }
    }

    #[test]
    fn ln_exp_roundtrip_contains_identity() {
        for &v in &[1e-8, 0.5, 1.0, 1.03, 2.0, 1e4] {
            let x = RInterval::point(v);
            let back = x.ln().unwrap().exp();
            assert!(back.contains(v), "v={v} back={back:?}");
            assert!(back.width() < v * 1e-12);
        }
    }

    #[test]
    fn mig_mag_are_exact() {
        let x = RInterval::new(-3.0, 2.0);
        assert_eq!(x.mag(), 3.0);
        assert_eq!(x.mig(), 0.0);
        let y = RInterval::new(1.0, 2.0);
        assert_eq!(y.mig(), 1.0);
        assert_eq!(y.neg().mig(), 1.0);
    }

    proptest! {
        /// Containment is monotone: operations on subintervals land inside
        /// operations on the enclosing intervals.
        #[test]
        fn containment_monotone(a in -1e6f64..1e6, w1 in 0f64..10.0, b in -1e6f64..1e6, w2 in 0f64..10.0, s in 0f64..1.0, t in 0f64..1.0) {
            let x = RInterval::new(a, a + w1);
            let y = RInterval::new(b, b + w2);
            let xs = RInterval::point(a + s * w1);
            let ys = RInterval::point(b + t * w2);
            prop_assert!(x.add(y).contains_interval(xs.add(ys)));
            prop_assert!(x.mul(y).contains_interval(xs.mul(ys)));
            prop_assert!(x.sub(y).contains_interval(xs.sub(ys)));
        }

        #[test]
        fn abs_value_bounds(a in -1e6f64..1e6, w in 0f64..10.0, s in 0f64..1.0) {
            let x = RInterval::new(a, a + w);
            let p = a + s * w;
            prop_assert!(x.mig() <= p.abs() + 1e-9);
            prop_assert!(p.abs() <= x.mag());
        }
    }

    #[test]
    fn signed_rational_sanity() {
        // Guard the rational test helpers themselves.
        assert!(rat(-1.5).is_negative());
    }
}
