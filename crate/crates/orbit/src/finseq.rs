//! Finite two-sided complex Fourier vectors and their Taylor-graded stacks,
//! in plain floating point.
//!
//! These are the working types of the non-rigorous Newton stage. They
//! implement the coefficient-algebra interface so a polynomial vector field
//! can be evaluated directly on coefficient data; the rigorous counterparts
//! live in the sequence-space crate.

use field::{CoeffAlgebra, FieldError};
use num_complex::Complex64;
use rigor::{CInterval, RInterval};
use seqspace::WeightedSequence;

/// Two-sided complex coefficient vector on the mode window
/// `[lo, lo + data.len())`. Modes outside the window are zero.
#[derive(Clone, Debug)]
pub struct FinSeq {
    lo: i64,
    data: Vec<Complex64>,
}

impl FinSeq {
    pub fn new(lo: i64, data: Vec<Complex64>) -> Self {
        FinSeq { lo, data }
    }

    pub fn zero() -> Self {
        FinSeq { lo: 0, data: Vec::new() }
    }

    /// The single-mode sequence `c delta_0`.
    pub fn delta(c: Complex64) -> Self {
        FinSeq { lo: 0, data: vec![c] }
    }

    /// Symmetric window `|k| <= half`, all zeros.
    pub fn window(half: i64) -> Self {
        assert!(half >= 0);
        FinSeq { lo: -half, data: vec![Complex64::new(0.0, 0.0); (2 * half + 1) as usize] }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.data.len() as i64 - 1
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, k: i64) -> Complex64 {
        if self.data.is_empty() || k < self.lo || k > self.hi() {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[(k - self.lo) as usize]
        }
    }

    pub fn set(&mut self, k: i64, v: Complex64) {
        assert!(
            !self.data.is_empty() && k >= self.lo && k <= self.hi(),
            "mode {k} outside stored window"
        );
        self.data[(k - self.lo) as usize] = v;
    }

    pub fn add_at(&mut self, k: i64, v: Complex64) {
        let cur = self.get(k);
        if k < self.lo || self.data.is_empty() || k > self.hi() {
            assert!(v.norm() == 0.0, "mode {k} outside stored window");
            return;
        }
        self.set(k, cur + v);
    }

    /// Keep only the modes `|k| < m`, on the symmetric window.
    pub fn truncated(&self, m: i64) -> Self {
        let mut out = FinSeq::window(m - 1);
        for k in -(m - 1)..=(m - 1) {
            out.set(k, self.get(k));
        }
        out
    }

    /// Weighted norm `sum_k |a_k| nu^|k|` in plain floating point.
    pub fn norm(&self, nu: f64) -> f64 {
        let mut acc = 0.0;
        for k in self.lo..=self.hi() {
            acc += self.get(k).norm() * nu.powi(k.unsigned_abs() as i32);
        }
        acc
    }

    /// Replace the sequence by its conjugate-symmetric part
    /// `(a_k + conj(a_{-k})) / 2`.
    pub fn symmetrize(&mut self) {
        let (lo, hi) = (self.lo, self.hi());
        let half = (-lo).max(hi);
        let mut out = FinSeq::window(half);
        for k in -half..=half {
            out.set(k, 0.5 * (self.get(k) + self.get(-k).conj()));
        }
        *self = out;
    }

    /// Value of the trigonometric polynomial at angle `theta`.
    pub fn eval_angle(&self, theta: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in self.lo..=self.hi() {
            acc += self.get(k) * Complex64::new(0.0, k as f64 * theta).exp();
        }
        acc
    }

    /// Exact lift to a point-interval weighted sequence.
    pub fn to_weighted(&self, nu: f64) -> WeightedSequence {
        if self.data.is_empty() {
            return WeightedSequence::zero(nu, seqspace::Symmetry::None);
        }
        let data = self.data.iter().map(|z| CInterval::point(*z)).collect();
        WeightedSequence::two_sided(nu, self.lo, data)
    }

    /// One-sided coefficients `a_0..a_{m-1}` completed by conjugate symmetry.
    pub fn from_one_sided(coeffs: &[Complex64]) -> Self {
        let half = coeffs.len() as i64 - 1;
        let mut out = FinSeq::window(half.max(0));
        for (k, c) in coeffs.iter().enumerate() {
            out.set(k as i64, *c);
            if k > 0 {
                out.set(-(k as i64), c.conj());
            }
        }
        out
    }

    fn conv(&self, other: &Self) -> Self {
        if self.data.is_empty() || other.data.is_empty() {
            return FinSeq::zero();
        }
        let lo = self.lo + other.lo;
        let len = self.data.len() + other.data.len() - 1;
        let mut data = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.data.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (j, b) in other.data.iter().enumerate() {
                data[i + j] += a * b;
            }
        }
        FinSeq { lo, data }
    }
}

impl CoeffAlgebra for FinSeq {
    fn zero_like(_: &Self) -> Self {
        FinSeq::zero()
    }
    fn one_like(_: &Self) -> Self {
        FinSeq::delta(Complex64::new(1.0, 0.0))
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        if self.data.is_empty() {
            return Ok(other.clone());
        }
        if other.data.is_empty() {
            return Ok(self.clone());
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let mut data = Vec::with_capacity((hi - lo + 1) as usize);
        for k in lo..=hi {
            data.push(self.get(k) + other.get(k));
        }
        Ok(FinSeq { lo, data })
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self.conv(other))
    }
    fn scale_real(&self, c: RInterval) -> Self {
        let s = c.mid();
        FinSeq { lo: self.lo, data: self.data.iter().map(|z| z * s).collect() }
    }
}

/// Taylor-graded stack of finite Fourier vectors: order `alpha` holds the
/// coefficient of `sigma^alpha`. Products are Cauchy products in the grading
/// and convolutions in the modes; the jet grows as needed.
#[derive(Clone, Debug)]
pub struct FtStack {
    orders: Vec<FinSeq>,
}

impl FtStack {
    pub fn new(orders: Vec<FinSeq>) -> Self {
        assert!(!orders.is_empty());
        FtStack { orders }
    }

    /// A pure order-0 element.
    pub fn order0(seq: FinSeq) -> Self {
        FtStack { orders: vec![seq] }
    }

    /// A scalar constant at order 0.
    pub fn constant(c: Complex64) -> Self {
        FtStack { orders: vec![FinSeq::delta(c)] }
    }

    pub fn n_orders(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self, alpha: usize) -> FinSeq {
        self.orders.get(alpha).cloned().unwrap_or_else(FinSeq::zero)
    }

    pub fn orders(&self) -> &[FinSeq] {
        &self.orders
    }
}

impl CoeffAlgebra for FtStack {
    fn zero_like(_: &Self) -> Self {
        FtStack { orders: vec![FinSeq::zero()] }
    }
    fn one_like(_: &Self) -> Self {
        FtStack { orders: vec![FinSeq::delta(Complex64::new(1.0, 0.0))] }
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        let n = self.n_orders().max(other.n_orders());
        let mut orders = Vec::with_capacity(n);
        for alpha in 0..n {
            orders.push(CoeffAlgebra::add(&self.order(alpha), &other.order(alpha))?);
        }
        Ok(FtStack { orders })
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        let n = self.n_orders() + other.n_orders() - 1;
        let mut orders = vec![FinSeq::zero(); n];
        for (a, sa) in self.orders.iter().enumerate() {
            for (b, sb) in other.orders.iter().enumerate() {
                let prod = CoeffAlgebra::mul(sa, sb)?;
                orders[a + b] = CoeffAlgebra::add(&orders[a + b], &prod)?;
            }
        }
        Ok(FtStack { orders })
    }
    fn scale_real(&self, c: RInterval) -> Self {
        FtStack { orders: self.orders.iter().map(|s| s.scale_real(c)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use field::systems::lorenz_classic;
    use field::{apply_field, eval_monomials, Monomial, PolynomialVectorField};

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn convolution_matches_pointwise_products_on_the_circle() {
        let a = FinSeq::new(-1, vec![z(0.5, -0.25), z(1.0, 0.0), z(0.5, 0.25)]);
        let b = FinSeq::new(0, vec![z(-1.0, 0.0), z(0.0, 2.0)]);
        let c = CoeffAlgebra::mul(&a, &b).unwrap();
        for g in 0..17 {
            let t = g as f64 / 17.0 * std::f64::consts::TAU;
            let lhs = c.eval_angle(t);
            let rhs = a.eval_angle(t) * b.eval_angle(t);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn symmetrize_produces_a_real_valued_angle_function() {
        let mut a = FinSeq::new(-2, vec![z(0.3, 0.7), z(-1.0, 0.1), z(2.0, 0.5), z(0.9, 0.0), z(0.1, 0.4)]);
        a.symmetrize();
        for g in 0..9 {
            let t = g as f64 / 9.0 * std::f64::consts::TAU;
            assert!(a.eval_angle(t).im.abs() < 1e-14);
        }
        let mut again = a.clone();
        again.symmetrize();
        for k in -3..=3 {
            assert!((again.get(k) - a.get(k)).norm() < 1e-15);
        }
    }

    #[test]
    fn field_evaluation_on_sequences_matches_the_sampled_flow_field() {
        let f = lorenz_classic();
        let comps: Vec<FinSeq> = (0..3)
            .map(|i| {
                let mut s = FinSeq::window(2);
                s.set(0, z(1.0 + i as f64, 0.0));
                s.set(1, z(0.25, 0.5 * i as f64));
                s.set(-1, s.get(1).conj());
                s
            })
            .collect();
        let image = apply_field(&f, &comps).unwrap();
        for g in 0..11 {
            let t = g as f64 / 11.0 * std::f64::consts::TAU;
            let state: Vec<Complex64> = comps.iter().map(|s| s.eval_angle(t)).collect();
            let point = apply_field(&f, &state).unwrap();
            for i in 0..3 {
                assert!((image[i].eval_angle(t) - point[i]).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn graded_product_tracks_the_polynomial_jet() {
        let x = FtStack::new(vec![FinSeq::delta(z(2.0, 0.0)), FinSeq::delta(z(1.0, 0.0))]);
        let monos = vec![Monomial::new(RInterval::point(1.0), vec![3])];
        let cube = eval_monomials(&monos, std::slice::from_ref(&x)).unwrap();
        let expect = [8.0, 12.0, 6.0, 1.0];
        assert_eq!(cube.n_orders(), 4);
        for (alpha, want) in expect.iter().enumerate() {
            assert!((cube.order(alpha).get(0) - z(*want, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn stack_field_evaluation_agrees_with_order_zero_evaluation() {
        let f = PolynomialVectorField::new(
            2,
            vec![
                vec![
                    Monomial::new(RInterval::point(1.0), vec![1, 1]),
                    Monomial::new(RInterval::point(-0.5), vec![0, 1]),
                ],
                vec![Monomial::new(RInterval::point(2.0), vec![2, 0])],
            ],
            Vec::new(),
        )
        .unwrap();
        let a = FinSeq::new(-1, vec![z(0.2, -0.1), z(1.0, 0.0), z(0.2, 0.1)]);
        let b = FinSeq::new(0, vec![z(0.5, 0.0), z(0.0, 0.3)]);
        let stacks = vec![FtStack::order0(a.clone()), FtStack::order0(b.clone())];
        let by_stack = apply_field(&f, &stacks).unwrap();
        let by_seq = apply_field(&f, &[a, b]).unwrap();
        for i in 0..2 {
            let s = by_stack[i].order(0);
            for k in -2..=2 {
                assert!((s.get(k) - by_seq[i].get(k)).norm() < 1e-13);
            }
            for alpha in 1..by_stack[i].n_orders() {
                assert!(by_stack[i].order(alpha).norm(1.0) < 1e-14);
            }
        }
    }
}
