//! Eventually-diagonal operators: an explicit finite block on the modes
//! `|k| < m` and a diagonal rule outside.
//!
//! The operator norm on the weighted sequence space is bounded by the
//! maximum of the weighted column sums of the finite block and the supremum
//! of the tail diagonal moduli; both pieces are computed as enclosures.

use crate::seq::{weights, Symmetry, WeightedSequence};
use crate::SeqError;
use rigor::mat::Mat;
use rigor::{CInterval, RInterval};

/// Diagonal action on the modes `|k| >= m`.
#[derive(Clone, Debug)]
pub enum TailRule {
    Zero,
    Const(CInterval),
    /// `u_k = 1 / (a k + b)`.
    RecipLinear { a: CInterval, b: CInterval },
    /// `u_k = a k + b` (unbounded; usable for residual assembly, not for
    /// operator norms).
    Linear { a: CInterval, b: CInterval },
}

/// Linear operator with finite block on `|k| < m` and diagonal tail.
#[derive(Clone, Debug)]
pub struct EventuallyDiagonalOp {
    m: i64,
    /// `(2m-1) x (2m-1)`, row and column index `k + m - 1` for mode `k`.
    finite: Mat<CInterval>,
    tail: TailRule,
}

impl EventuallyDiagonalOp {
    pub fn new(m: i64, finite: Mat<CInterval>, tail: TailRule) -> Self {
        assert!(m >= 1);
        let side = (2 * m - 1) as usize;
        assert_eq!(finite.nrows(), side);
        assert_eq!(finite.ncols(), side);
        EventuallyDiagonalOp { m, finite, tail }
    }

    pub fn m(&self) -> i64 {
        self.m
    }

    pub fn finite(&self) -> &Mat<CInterval> {
        &self.finite
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    pub fn entry(&self, k: i64, n: i64) -> CInterval {
        assert!(k.abs() < self.m && n.abs() < self.m);
        self.finite[((k + self.m - 1) as usize, (n + self.m - 1) as usize)]
    }

    /// Diagonal value at a tail mode `|k| >= m`.
    pub fn tail_value(&self, k: i64) -> Result<CInterval, SeqError> {
        debug_assert!(k.abs() >= self.m);
        tail_rule_value(&self.tail, k)
    }

    /// Upper bound on `sup_{|k| >= m} |u_k|`.
    pub fn tail_sup_mod_ub(&self) -> Result<f64, SeqError> {
        match &self.tail {
            TailRule::Zero => Ok(0.0),
            TailRule::Const(c) => Ok(c.mod_ub()),
            TailRule::RecipLinear { a, b } => recip_linear_sup_ub(*a, *b, self.m),
            TailRule::Linear { .. } => Err(SeqError::Usage(
                "linear tail diagonal is unbounded; no operator norm".into(),
            )),
        }
    }

    /// Upper bound on `sup_{|k| >= m} |k u_k|` for a reciprocal-linear tail.
    pub fn tail_sup_mod_modescaled_ub(&self) -> Result<f64, SeqError> {
        match &self.tail {
            TailRule::Zero => Ok(0.0),
            TailRule::RecipLinear { a, b } => recip_linear_modescaled_sup_ub(*a, *b, self.m),
            _ => Err(SeqError::Usage(
                "mode-scaled tail bound requires a reciprocal-linear tail".into(),
            )),
        }
    }

    /// Weighted column norms `sum_k |A_{k,n}| nu^|k|` of the finite block,
    /// indexed by `n + m - 1`.
    pub fn col_norms(&self, nu: f64) -> Vec<RInterval> {
        let w = weights(nu, (self.m - 1).max(0) as usize);
        let mut out = Vec::with_capacity(self.finite.ncols());
        for n in -(self.m - 1)..=(self.m - 1) {
            let mut acc = RInterval::ZERO;
            for k in -(self.m - 1)..=(self.m - 1) {
                acc = acc.add(self.entry(k, n).modulus().mul(w[k.unsigned_abs() as usize]));
            }
            out.push(acc);
        }
        out
    }

    /// Upper bound on the operator norm with respect to the weight `nu`:
    /// `max(K, sup_{|k| >= m} |u_k|)` with `K` the maximum over columns `n`
    /// of `nu^{-|n|} sum_k |A_{k,n}| nu^|k|`.
    pub fn opnorm(&self, nu: f64) -> Result<RInterval, SeqError> {
        let w = weights(nu, (self.m - 1).max(0) as usize);
        let cols = self.col_norms(nu);
        let mut k_bound = 0.0f64;
        for n in -(self.m - 1)..=(self.m - 1) {
            let c = cols[(n + self.m - 1) as usize]
                .div(w[n.unsigned_abs() as usize])
                .map_err(|e| SeqError::Domain(e.to_string()))?;
            k_bound = k_bound.max(c.hi);
        }
        Ok(RInterval::new(0.0, k_bound.max(self.tail_sup_mod_ub()?)))
    }

    /// Apply the operator to a sequence: finite block on modes `|k| < m`,
    /// diagonal rule outside. The result is stored two-sided.
    pub fn apply(&self, x: &WeightedSequence) -> Result<WeightedSequence, SeqError> {
        let kx = x.kmax();
        let half = (self.m - 1).max(kx);
        if half < 0 {
            return Ok(WeightedSequence::zero(x.nu(), Symmetry::None));
        }
        let mut data = Vec::with_capacity((2 * half + 1) as usize);
        for k in -half..=half {
            if k.abs() < self.m {
                let mut acc = CInterval::ZERO;
                for n in -(self.m - 1)..=(self.m - 1) {
                    acc = acc.add(self.entry(k, n).mul(x.get(n)));
                }
                data.push(acc);
            } else {
                data.push(self.tail_value(k)?.mul(x.get(k)));
            }
        }
        Ok(WeightedSequence::two_sided(x.nu(), -half, data))
    }
}

/// Upper bound on `sup_{|k| >= m} 1 / |a k + b|`.
pub fn recip_linear_sup_ub(a: CInterval, b: CInterval, m: i64) -> Result<f64, SeqError> {
    let rule = TailRule::RecipLinear { a, b };
    let mut sup = 0.0f64;
    for k in tail_denominator_candidates(&a, &b, m)? {
        sup = sup.max(tail_rule_value(&rule, k)?.mod_ub());
    }
    Ok(sup)
}

/// Lower bound on `inf_{|k| >= m} |a k + b|`.
pub fn recip_linear_inf_den_lb(a: CInterval, b: CInterval, m: i64) -> Result<f64, SeqError> {
    let mut inf = f64::INFINITY;
    for k in tail_denominator_candidates(&a, &b, m)? {
        inf = inf.min(a.mul_real(RInterval::from_i64(k)).add(b).mod_lb());
    }
    if inf <= 0.0 {
        return Err(SeqError::Domain(
            "tail denominator not bounded away from zero".into(),
        ));
    }
    Ok(inf)
}

/// Upper bound on `sup_{|k| >= m} |k| / |a k + b|` from
/// `|k| / |a k + b| = 1 / |a + b/k| <= 1 / (mig(a) - mag(b)/m)`.
pub fn recip_linear_modescaled_sup_ub(a: CInterval, b: CInterval, m: i64) -> Result<f64, SeqError> {
    let floor = RInterval::point(a.mod_lb())
        .sub(RInterval::point(b.mod_ub()).div(RInterval::from_i64(m)).unwrap());
    if floor.lo <= 0.0 {
        return Err(SeqError::Domain(
            "tail denominator not bounded away from zero".into(),
        ));
    }
    Ok(RInterval::ONE.div(floor).unwrap().hi)
}

fn tail_rule_value(rule: &TailRule, k: i64) -> Result<CInterval, SeqError> {
    match rule {
        TailRule::Zero => Ok(CInterval::ZERO),
        TailRule::Const(c) => Ok(*c),
        TailRule::RecipLinear { a, b } => a
            .mul_real(RInterval::from_i64(k))
            .add(*b)
            .recip()
            .map_err(|e| SeqError::Domain(e.to_string())),
        TailRule::Linear { a, b } => Ok(a.mul_real(RInterval::from_i64(k)).add(*b)),
    }
}

/// Integer modes `|k| >= m` at which `|a k + b|` can attain its minimum:
/// the block boundary and the integers adjacent to the real minimizer of
/// the quadratic `|a k + b|^2`.
fn tail_denominator_candidates(
    a: &CInterval,
    b: &CInterval,
    m: i64,
) -> Result<Vec<i64>, SeqError> {
    let a2 = a.mod_sq();
    if a2.lo <= 0.0 {
        return Err(SeqError::Domain(
            "tail rule leading coefficient may vanish".into(),
        ));
    }
    let cross = a.re.mul(b.re).add(a.im.mul(b.im));
    let kstar = cross.neg().div(a2).map_err(|e| SeqError::Domain(e.to_string()))?;
    let mut cands = vec![m, -m];
    let lo = kstar.lo.floor();
    let hi = kstar.hi.ceil();
    if hi - lo <= 16.0 {
        let (lo, hi) = (lo as i64 - 1, hi as i64 + 1);
        for k in lo..=hi {
            if k.abs() >= m {
                cands.push(k);
            }
        }
    } else if kstar.lo > m as f64 || kstar.hi < -(m as f64) {
        return Err(SeqError::Domain(
            "tail minimizer enclosure too wide to certify".into(),
        ));
    }
    cands.sort_unstable();
    cands.dedup();
    Ok(cands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(re: f64, im: f64) -> CInterval {
        CInterval::new(RInterval::point(re), RInterval::point(im))
    }

    #[test]
    fn identity_with_unit_tail_has_norm_one() {
        let m = 3i64;
        let side = (2 * m - 1) as usize;
        let finite = Mat::from_fn(side, side, |i, j| {
            if i == j {
                CInterval::ONE
            } else {
                CInterval::ZERO
            }
        });
        let op = EventuallyDiagonalOp::new(m, finite, TailRule::Const(CInterval::ONE));
        let bound = op.opnorm(1.3).unwrap();
        assert!(bound.lo <= 1.0 && 1.0 <= bound.hi);
        assert!(bound.hi < 1.0 + 1e-12);
    }

    #[test]
    fn diagonal_block_norm_is_largest_modulus() {
        let m = 3i64;
        let side = (2 * m - 1) as usize;
        let d = [0.3, -1.7, 0.2, 0.9, 1.1];
        let finite = Mat::from_fn(side, side, |i, j| {
            if i == j {
                point(d[i], 0.0)
            } else {
                CInterval::ZERO
            }
        });
        let op = EventuallyDiagonalOp::new(m, finite, TailRule::Zero);
        let bound = op.opnorm(1.7).unwrap();
        assert!((bound.hi - 1.7f64).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_dominates_randomized_rayleigh_quotients() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let m = 3i64;
        let side = (2 * m - 1) as usize;
        let nu = 1.1;
        let finite = Mat::from_fn(side, side, |_, _| {
            point(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let op = EventuallyDiagonalOp::new(
            m,
            finite,
            TailRule::RecipLinear { a: point(0.0, -2.0), b: point(-0.3, 0.0) },
        );
        let bound = op.opnorm(nu).unwrap().hi;
        for _ in 0..1000 {
            let half = rng.gen_range(0..6);
            let data: Vec<CInterval> = (-half..=half)
                .map(|_| point(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let x = WeightedSequence::two_sided(nu, -half, data);
            let nx = x.norm();
            if nx.lo <= 0.0 {
                continue;
            }
            let y = op.apply(&x).unwrap();
            assert!(
                y.norm().lo <= bound * nx.hi * (1.0 + 1e-12),
                "quotient exceeded certified operator norm"
            );
        }
    }

    #[test]
    fn apply_matches_manual_computation() {
        let m = 2i64;
        let finite = Mat::from_fn(3, 3, |i, j| point((i + 2 * j) as f64, 0.0));
        let op = EventuallyDiagonalOp::new(
            m,
            finite,
            TailRule::RecipLinear { a: point(1.0, 0.0), b: CInterval::ZERO },
        );
        let x = WeightedSequence::two_sided(
            1.0,
            -3,
            (0..7).map(|i| point(i as f64, 0.0)).collect(),
        );
        let y = op.apply(&x).unwrap();
        for k in -1..=1i64 {
            let mut expect = 0.0;
            for n in -1..=1i64 {
                expect += ((k + 1) + 2 * (n + 1)) as f64 * (n + 3) as f64;
            }
            let z = y.get(k);
            assert!(z.re.contains(expect) && z.re.width() < 1e-12);
        }
        let z = y.get(3);
        assert!(z.re.contains(2.0));
        let z = y.get(-2);
        assert!(z.re.contains(-0.5));
    }

    #[test]
    fn tail_supremum_catches_interior_minimum() {
        let m = 2i64;
        let side = (2 * m - 1) as usize;
        let finite = Mat::from_fn(side, side, |_, _| CInterval::ZERO);
        let a = point(0.0, -1.0);
        let b = point(0.0, 9.7);
        let op = EventuallyDiagonalOp::new(m, finite, TailRule::RecipLinear { a, b });
        let sup = op.tail_sup_mod_ub().unwrap();
        let mut sampled = 0.0f64;
        for k in -200..=200i64 {
            if k.abs() >= m {
                let u = 1.0 / (num_complex::Complex64::new(0.0, -(k as f64))
                    + num_complex::Complex64::new(0.0, 9.7))
                .norm();
                sampled = sampled.max(u);
            }
        }
        assert!(sup >= sampled && sup < sampled * (1.0 + 1e-9));
    }

    #[test]
    fn mode_scaled_tail_bound_dominates_samples() {
        let m = 10i64;
        let side = (2 * m - 1) as usize;
        let finite = Mat::from_fn(side, side, |_, _| CInterval::ZERO);
        let a = point(0.0, -1.4);
        let b = point(-3.0, 0.5);
        let op = EventuallyDiagonalOp::new(m, finite, TailRule::RecipLinear { a, b });
        let bound = op.tail_sup_mod_modescaled_ub().unwrap();
        for k in 10..10_000i64 {
            for s in [-1i64, 1] {
                let kk = (s * k) as f64;
                let den = num_complex::Complex64::new(-3.0, -1.4 * kk + 0.5).norm();
                assert!(kk.abs() / den <= bound);
            }
        }
    }
}
