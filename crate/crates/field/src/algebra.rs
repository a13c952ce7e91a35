//! Coefficient algebras a polynomial field can be evaluated over.

use crate::FieldError;
use num_complex::Complex64;
use rigor::{CInterval, RInterval};
use seqspace::{cc_prod, conv, FourierTaylorSeries, Symmetry, WeightedSequence};

/// Commutative algebra with a real scalar action, used as the coefficient
/// domain when evaluating polynomial vector fields.
///
/// `zero_like` and `one_like` take a model element because structured
/// algebras (sequences, graded series) carry shape data (weight, symmetry,
/// frequency) that the identities must match.
pub trait CoeffAlgebra: Clone {
    fn zero_like(model: &Self) -> Self;
    fn one_like(model: &Self) -> Self;
    fn add(&self, other: &Self) -> Result<Self, FieldError>;
    fn mul(&self, other: &Self) -> Result<Self, FieldError>;
    fn scale_real(&self, c: RInterval) -> Self;
}

/// Point arithmetic; the scalar acts through its midpoint. Only for
/// non-rigorous numerics.
impl CoeffAlgebra for f64 {
    fn zero_like(_: &Self) -> Self {
        0.0
    }
    fn one_like(_: &Self) -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self + other)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * other)
    }
    fn scale_real(&self, c: RInterval) -> Self {
        self * c.mid()
    }
}

/// Point arithmetic; the scalar acts through its midpoint. Only for
/// non-rigorous numerics.
impl CoeffAlgebra for Complex64 {
    fn zero_like(_: &Self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(_: &Self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self + other)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(self * other)
    }
    fn scale_real(&self, c: RInterval) -> Self {
        self * c.mid()
    }
}

impl CoeffAlgebra for RInterval {
    fn zero_like(_: &Self) -> Self {
        RInterval::ZERO
    }
    fn one_like(_: &Self) -> Self {
        RInterval::ONE
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(RInterval::add(*self, *other))
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(RInterval::mul(*self, *other))
    }
    fn scale_real(&self, c: RInterval) -> Self {
        RInterval::mul(*self, c)
    }
}

impl CoeffAlgebra for CInterval {
    fn zero_like(_: &Self) -> Self {
        CInterval::ZERO
    }
    fn one_like(_: &Self) -> Self {
        CInterval::ONE
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(CInterval::add(*self, *other))
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(CInterval::mul(*self, *other))
    }
    fn scale_real(&self, c: RInterval) -> Self {
        self.mul_real(c)
    }
}

/// Convolution algebra on weighted sequences.
impl CoeffAlgebra for WeightedSequence {
    fn zero_like(model: &Self) -> Self {
        WeightedSequence::zero(model.nu(), model.symmetry())
    }
    fn one_like(model: &Self) -> Self {
        let delta = vec![CInterval::ONE];
        match model.symmetry() {
            Symmetry::None => WeightedSequence::two_sided(model.nu(), 0, delta),
            Symmetry::Conjugate => WeightedSequence::conjugate(model.nu(), delta),
            Symmetry::Even => WeightedSequence::even(model.nu(), delta),
        }
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(WeightedSequence::add(self, other)?)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(conv(self, other)?)
    }
    fn scale_real(&self, c: RInterval) -> Self {
        WeightedSequence::scale_real(self, c)
    }
}

/// Cauchy-convolution algebra on Taylor-graded sequence stacks. Products
/// grow the stored jet; callers truncate when they need a fixed grading.
impl CoeffAlgebra for FourierTaylorSeries {
    fn zero_like(model: &Self) -> Self {
        FourierTaylorSeries::zero(model.nu(), model.omega(), model.symmetry(), 1)
    }
    fn one_like(model: &Self) -> Self {
        let seq = WeightedSequence::zero(model.nu(), model.symmetry());
        let delta = CoeffAlgebra::one_like(&seq);
        FourierTaylorSeries::new(model.nu(), model.omega(), model.symmetry(), vec![delta])
            .expect("shape data taken from the model")
    }
    fn add(&self, other: &Self) -> Result<Self, FieldError> {
        let n = self.n_orders().max(other.n_orders());
        let mut orders = Vec::with_capacity(n);
        for alpha in 0..n {
            orders.push(WeightedSequence::add(&self.order(alpha), &other.order(alpha))?);
        }
        Ok(FourierTaylorSeries::new(self.nu(), self.omega(), self.symmetry(), orders)?)
    }
    fn mul(&self, other: &Self) -> Result<Self, FieldError> {
        Ok(cc_prod(self, other, false)?)
    }
    fn scale_real(&self, c: RInterval) -> Self {
        let orders = self.orders().iter().map(|a| a.scale_real(c)).collect();
        FourierTaylorSeries::new(self.nu(), self.omega(), self.symmetry(), orders)
            .expect("scaling preserves shape")
    }
}
