//! Enclosures of sine and cosine over interval arguments.
//!
//! The libm implementations are within about one ulp over the argument
//! ranges used here (|x| below a few thousand); endpoint evaluations are
//! widened by four ulps and interior critical points contribute exactly
//! plus or minus one, so the hull is a true enclosure.

use crate::complex::CInterval;
use crate::interval::{steps_down, steps_up, RInterval};

fn pi() -> RInterval {
    RInterval { lo: std::f64::consts::PI.next_down(), hi: std::f64::consts::PI.next_up() }
}

fn eval_widened(x: f64, f: fn(f64) -> f64) -> RInterval {
    let v = f(x);
    RInterval { lo: steps_down(v, 4).max(-1.0), hi: steps_up(v, 4).min(1.0) }
}

/// Enclosure of `cos` over the interval.
pub fn iv_cos(x: RInterval) -> RInterval {
    debug_assert!(x.is_finite());
    let two_pi = pi().scale(2.0);
    if x.width() >= two_pi.lo {
        return RInterval::new(-1.0, 1.0);
    }
    let mut out = eval_widened(x.lo, f64::cos).hull(eval_widened(x.hi, f64::cos));
    // Critical points of cos are the integer multiples of pi; include every
    // multiple whose enclosure intersects the argument interval.
    let n_lo = (x.lo / pi().hi).floor() as i64 - 1;
    let n_hi = (x.hi / pi().lo).ceil() as i64 + 1;
    for n in n_lo..=n_hi {
        let npi = pi().scale(n as f64);
        if npi.hi >= x.lo && npi.lo <= x.hi {
            let v = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            out = out.hull(RInterval::point(v));
        }
    }
    out.intersect(RInterval::new(-1.0, 1.0)).unwrap()
}

/// Enclosure of `sin` over the interval, via `sin x = cos(x - pi/2)`.
pub fn iv_sin(x: RInterval) -> RInterval {
    iv_cos(x.sub(pi().scale(0.5)))
}

/// Enclosure of `exp(i x)` as a complex box.
pub fn iv_exp_i(x: RInterval) -> CInterval {
    CInterval { re: iv_cos(x), im: iv_sin(x) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cos_sin_contain_dense_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x717);
        for _ in 0..3_000 {
            let a = (rng.gen::<f64>() - 0.5) * 40.0;
            let w = rng.gen::<f64>() * rng.gen::<f64>() * 9.0;
            let x = RInterval::new(a, a + w);
            let c = iv_cos(x);
            let s = iv_sin(x);
            for j in 0..=64 {
                let t = a + w * (j as f64) / 64.0;
                assert!(c.contains(t.cos()), "cos({t}) not in {c:?} from {x:?}");
                assert!(s.contains(t.sin()), "sin({t}) not in {s:?} from {x:?}");
            }
        }
    }

    #[test]
    fn interior_extrema_are_captured() {
        let x = RInterval::new(3.0, 3.3); // contains pi
        assert!(iv_cos(x).contains(-1.0));
        let y = RInterval::new(1.4, 1.8); // contains pi/2
        assert!(iv_sin(y).contains(1.0));
    }

    #[test]
    fn wide_arguments_fall_back_to_unit_range() {
        let x = RInterval::new(0.0, 100.0);
        assert_eq!(iv_cos(x), RInterval::new(-1.0, 1.0));
    }

    #[test]
    fn unit_circle_points_are_enclosed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2_000 {
            let t = (rng.gen::<f64>() - 0.5) * 20.0;
            let e = iv_exp_i(RInterval::point(t));
            assert!(e.contains(num_complex::Complex64::new(t.cos(), t.sin())));
            assert!(e.mod_ub() < 1.0 + 1e-12);
        }
    }
}
