//! The two built-in systems: the quadratic three-dimensional flow and the
//! polynomial embedding of the equilateral restricted four-body problem.

use crate::poly::{Monomial, PolynomialVectorField};
use crate::FieldError;
use rigor::RInterval;

/// Classic quadratic three-dimensional flow
/// `(sigma (y - x), rho x - y - x z, x y - beta z)`.
pub fn lorenz(sigma: RInterval, rho: RInterval, beta: RInterval) -> PolynomialVectorField {
    let m = |coef: RInterval, exps: [u32; 3]| Monomial::new(coef, exps.to_vec());
    let components = vec![
        vec![m(sigma, [0, 1, 0]), m(sigma.neg(), [1, 0, 0])],
        vec![
            m(rho, [1, 0, 0]),
            m(RInterval::ONE.neg(), [0, 1, 0]),
            m(RInterval::ONE.neg(), [1, 0, 1]),
        ],
        vec![m(RInterval::ONE, [1, 1, 0]), m(beta.neg(), [0, 0, 1])],
    ];
    let params = vec![
        ("sigma".to_string(), sigma),
        ("rho".to_string(), rho),
        ("beta".to_string(), beta),
    ];
    PolynomialVectorField::new(3, components, params).expect("static shape")
}

/// Classic parameter values: `sigma = 10`, `rho = 28`, `beta` enclosing 8/3.
pub fn lorenz_classic() -> PolynomialVectorField {
    let beta = RInterval::from_i64(8).div(RInterval::from_i64(3)).expect("nonzero");
    lorenz(RInterval::point(10.0), RInterval::point(28.0), beta)
}

/// Enclosure of the cube root of a positive interval via `exp(ln(x)/3)`.
fn icbrt(x: RInterval) -> Result<RInterval, FieldError> {
    let l = x.ln()?;
    Ok(l.div(RInterval::from_i64(3))?.exp())
}

/// The equilateral restricted four-body problem in its five-dimensional
/// polynomial form, with state `(x, y, p, q, z)`:
///
/// ```text
/// x' = p
/// y' = q
/// p' = lambda2 x + 2 q - x z^3
/// q' = lambda1 y - 2 p - y z^3
/// z' = -z^3 (x p + y q)
/// ```
///
/// The variable `z` stands in for `(x^2 + y^2)^{-1/2}`; initial conditions
/// must satisfy the algebraic constraint `(x^2 + y^2) z^2 = 1`, which is
/// preserved by the flow.
#[derive(Clone, Debug)]
pub struct HillSystem {
    pub mu: RInterval,
    pub d: RInterval,
    pub lambda1: RInterval,
    pub lambda2: RInterval,
}

impl HillSystem {
    pub fn new(mu: RInterval) -> Result<Self, FieldError> {
        if !(mu.lo >= 0.0 && mu.hi <= 0.5) {
            return Err(FieldError::Domain(format!(
                "mass ratio [{}, {}] outside [0, 1/2]",
                mu.lo, mu.hi
            )));
        }
        let three = RInterval::from_i64(3);
        let inner = RInterval::ONE.sub(three.mul(mu)).add(three.mul(mu.square()));
        let d = inner.sqrt()?;
        let half3 = RInterval::from_i64(3).div(RInterval::from_i64(2))?;
        let lambda1 = half3.mul(RInterval::ONE.sub(d));
        let lambda2 = half3.mul(RInterval::ONE.add(d));
        Ok(HillSystem { mu, d, lambda1, lambda2 })
    }

    pub fn field(&self) -> PolynomialVectorField {
        let m = |coef: RInterval, exps: [u32; 5]| Monomial::new(coef, exps.to_vec());
        let one = RInterval::ONE;
        let two = RInterval::from_i64(2);
        let components = vec![
            vec![m(one, [0, 0, 1, 0, 0])],
            vec![m(one, [0, 0, 0, 1, 0])],
            vec![
                m(self.lambda2, [1, 0, 0, 0, 0]),
                m(two, [0, 0, 0, 1, 0]),
                m(one.neg(), [1, 0, 0, 0, 3]),
            ],
            vec![
                m(self.lambda1, [0, 1, 0, 0, 0]),
                m(two.neg(), [0, 0, 1, 0, 0]),
                m(one.neg(), [0, 1, 0, 0, 3]),
            ],
            vec![m(one.neg(), [1, 0, 1, 0, 3]), m(one.neg(), [0, 1, 0, 1, 3])],
        ];
        let params = vec![
            ("mu".to_string(), self.mu),
            ("lambda1".to_string(), self.lambda1),
            ("lambda2".to_string(), self.lambda2),
        ];
        PolynomialVectorField::new(5, components, params).expect("static shape")
    }

    /// Residual of the initial-condition constraint `(x^2 + y^2) z^2 - 1`.
    pub fn constraint_residual(&self, state: &[RInterval; 5]) -> RInterval {
        let r2 = state[0].square().add(state[1].square());
        r2.mul(state[4].square()).sub(RInterval::ONE)
    }

    /// First integral in the embedded variables:
    /// `lambda2 x^2 + lambda1 y^2 - p^2 - q^2 + 2 z`.
    pub fn jacobi_embedded(&self, state: &[RInterval; 5]) -> RInterval {
        self.lambda2
            .mul(state[0].square())
            .add(self.lambda1.mul(state[1].square()))
            .sub(state[2].square())
            .sub(state[3].square())
            .add(state[4].scale(2.0))
    }

    /// First integral in the original variables, with the radical term
    /// `2 / sqrt(x^2 + y^2)`. Errors on a state whose enclosure may touch
    /// the collision set.
    pub fn jacobi_radical(&self, state: &[RInterval; 4]) -> Result<RInterval, FieldError> {
        let r2 = state[0].square().add(state[1].square());
        let r = r2.sqrt()?;
        if r.lo <= 0.0 {
            return Err(FieldError::Domain(
                "state enclosure touches the collision set".into(),
            ));
        }
        Ok(self
            .lambda2
            .mul(state[0].square())
            .add(self.lambda1.mul(state[1].square()))
            .sub(state[2].square())
            .sub(state[3].square())
            .add(RInterval::from_i64(2).div(r)?))
    }

    /// The two equilibria on the `x`-axis: `x = +-lambda2^{-1/3}`,
    /// `p = q = 0`, `z = lambda2^{1/3} = 1/|x|`.
    pub fn libration_points(&self) -> Result<[[RInterval; 5]; 2], FieldError> {
        let z = icbrt(self.lambda2)?;
        let x = z.recip()?;
        let zero = RInterval::ZERO;
        Ok([
            [x, zero, zero, zero, z],
            [x.neg(), zero, zero, zero, z],
        ])
    }

    /// Right-hand side of the original four-dimensional system with the
    /// radical nonlinearity, in plain floating point. Only for non-rigorous
    /// cross-checks of the embedding.
    pub fn radical_rhs_f64(&self, s: &[f64; 4]) -> [f64; 4] {
        let (x, y, p, q) = (s[0], s[1], s[2], s[3]);
        let r32 = (x * x + y * y).powf(1.5);
        [
            p,
            q,
            self.lambda2.mid() * x + 2.0 * q - x / r32,
            self.lambda1.mid() * y - 2.0 * p - y / r32,
        ]
    }
}

/// Construct the embedded five-dimensional field for a given mass ratio.
pub fn hill_embedded(mu: RInterval) -> Result<PolynomialVectorField, FieldError> {
    Ok(HillSystem::new(mu)?.field())
}
