//! Monomial data, generic evaluation, and symbolic differentiation.

use crate::algebra::CoeffAlgebra;
use crate::FieldError;
use rigor::RInterval;

/// One term `coef * x_0^{e_0} ... x_{n-1}^{e_{n-1}}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: RInterval,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn new(coef: RInterval, exps: Vec<u32>) -> Self {
        Monomial { coef, exps }
    }

    pub fn total_degree(&self) -> u32 {
        self.exps.iter().sum()
    }
}

/// Polynomial vector field of dimension `dim`, stored as monomial sums.
#[derive(Clone, Debug)]
pub struct PolynomialVectorField {
    dim: usize,
    components: Vec<Vec<Monomial>>,
    params: Vec<(String, RInterval)>,
}

impl PolynomialVectorField {
    pub fn new(
        dim: usize,
        components: Vec<Vec<Monomial>>,
        params: Vec<(String, RInterval)>,
    ) -> Result<Self, FieldError> {
        if components.len() != dim {
            return Err(FieldError::Usage(format!(
                "{} component lists for dimension {dim}",
                components.len()
            )));
        }
        for (i, comp) in components.iter().enumerate() {
            for m in comp {
                if m.exps.len() != dim {
                    return Err(FieldError::Usage(format!(
                        "component {i} has a monomial with {} exponents, expected {dim}",
                        m.exps.len()
                    )));
                }
            }
        }
        Ok(PolynomialVectorField { dim, components, params })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize) -> &[Monomial] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }

    pub fn params(&self) -> &[(String, RInterval)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<RInterval> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Largest total degree over all monomials.
    pub fn degree(&self) -> u32 {
        self.components
            .iter()
            .flatten()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }
}

/// Cached powers `powers[i][e] = x_i^e` for a state vector, up to the
/// largest exponent each variable needs.
pub struct PowTable<T> {
    powers: Vec<Vec<T>>,
}

impl<T: CoeffAlgebra> PowTable<T> {
    pub fn build(state: &[T], max_exp: &[u32]) -> Result<Self, FieldError> {
        assert_eq!(state.len(), max_exp.len());
        let mut powers = Vec::with_capacity(state.len());
        for (x, &me) in state.iter().zip(max_exp) {
            let mut col = Vec::with_capacity(me as usize + 1);
            col.push(T::one_like(x));
            for e in 1..=me as usize {
                let next = col[e - 1].mul(x)?;
                col.push(next);
            }
            powers.push(col);
        }
        Ok(PowTable { powers })
    }

    fn get(&self, var: usize, exp: u32) -> &T {
        &self.powers[var][exp as usize]
    }
}

fn max_exponents(monos: &[&[Monomial]], dim: usize) -> Vec<u32> {
    let mut me = vec![0u32; dim];
    for comp in monos {
        for m in *comp {
            for (j, &e) in m.exps.iter().enumerate() {
                me[j] = me[j].max(e);
            }
        }
    }
    me
}

/// Evaluate a monomial sum over a power table. Terms are accumulated in
/// stored order, variables multiplied in ascending index order, so results
/// are deterministic.
pub fn eval_monomials_with<T: CoeffAlgebra>(
    monos: &[Monomial],
    table: &PowTable<T>,
    model: &T,
) -> Result<T, FieldError> {
    let mut acc = T::zero_like(model);
    for m in monos {
        let mut term = T::one_like(model);
        for (j, &e) in m.exps.iter().enumerate() {
            if e > 0 {
                term = term.mul(table.get(j, e))?;
            }
        }
        acc = acc.add(&term.scale_real(m.coef))?;
    }
    Ok(acc)
}

/// Evaluate a monomial sum at a state vector.
pub fn eval_monomials<T: CoeffAlgebra>(
    monos: &[Monomial],
    state: &[T],
) -> Result<T, FieldError> {
    let dim = state.len();
    let table = PowTable::build(state, &max_exponents(&[monos], dim))?;
    eval_monomials_with(monos, &table, &state[0])
}

/// Evaluate the whole field at a state vector, sharing one power table.
pub fn apply_field<T: CoeffAlgebra>(
    f: &PolynomialVectorField,
    state: &[T],
) -> Result<Vec<T>, FieldError> {
    if state.len() != f.dim() {
        return Err(FieldError::Usage(format!(
            "state of length {} for a field of dimension {}",
            state.len(),
            f.dim()
        )));
    }
    let comps: Vec<&[Monomial]> = f.components().iter().map(Vec::as_slice).collect();
    let table = PowTable::build(state, &max_exponents(&comps, f.dim()))?;
    f.components()
        .iter()
        .map(|monos| eval_monomials_with(monos, &table, &state[0]))
        .collect()
}

/// Exact symbolic Jacobian: entry `(i, j)` is the monomial sum
/// `d f_i / d x_j`.
pub fn jacobian(f: &PolynomialVectorField) -> Vec<Vec<Vec<Monomial>>> {
    let n = f.dim();
    let mut out = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for m in f.component(i) {
            for j in 0..n {
                let e = m.exps[j];
                if e == 0 {
                    continue;
                }
                let mut exps = m.exps.clone();
                exps[j] = e - 1;
                out[i][j].push(Monomial::new(m.coef.scale(e as f64), exps));
            }
        }
    }
    out
}

fn binom(n: u32, k: u32) -> f64 {
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Coefficients `c_1..c_deg` such that for any perturbation with
/// `||h_j|| <= r` in a Banach algebra whose component norms are bounded by
/// `norms[j]`,
///
/// `||g(x + h) - g(x)|| <= sum_d c_d r^d`.
///
/// Each monomial is expanded binomially; the terms of total `h`-degree `d`
/// contribute `|coef| * prod_j C(e_j, s_j) norms[j]^{e_j - s_j}` to `c_d`.
pub fn norm_inflation_coeffs(monos: &[Monomial], norms: &[RInterval]) -> Vec<RInterval> {
    let deg = monos.iter().map(Monomial::total_degree).max().unwrap_or(0) as usize;
    let mut out = vec![RInterval::ZERO; deg];
    for m in monos {
        let nvars = m.exps.len();
        let mut stack: Vec<(usize, u32, RInterval)> = vec![(0, 0, m.coef.abs())];
        while let Some((j, sdeg, weight)) = stack.pop() {
            if j == nvars {
                if sdeg >= 1 {
                    out[sdeg as usize - 1] = out[sdeg as usize - 1].add(weight);
                }
                continue;
            }
            let e = m.exps[j];
            for s in 0..=e {
                let factor = norms[j].abs().powi(e - s).scale(binom(e, s));
                stack.push((j + 1, sdeg + s, weight.mul(factor)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite")
    }

    fn random_field(rng: &mut ChaCha8Rng, dim: usize, terms: usize) -> PolynomialVectorField {
        let components = (0..dim)
            .map(|_| {
                (0..terms)
                    .map(|_| {
                        let coef = RInterval::point((rng.gen_range(-5i64..=5)) as f64);
                        let exps = (0..dim).map(|_| rng.gen_range(0..3u32)).collect();
                        Monomial::new(coef, exps)
                    })
                    .collect()
            })
            .collect();
        PolynomialVectorField::new(dim, components, Vec::new()).unwrap()
    }

    fn eval_rational(monos: &[Monomial], x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for m in monos {
            let mut term = rat(m.coef.mid());
            for (j, &e) in m.exps.iter().enumerate() {
                for _ in 0..e {
                    term *= x[j].clone();
                }
            }
            acc += term;
        }
        acc
    }

    #[test]
    fn interval_evaluation_contains_exact_rational_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            let f = random_field(&mut rng, 3, 4);
            let xs: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let state: Vec<RInterval> = xs.iter().map(|&x| RInterval::point(x)).collect();
            let xr: Vec<BigRational> = xs.iter().map(|&x| rat(x)).collect();
            let val = apply_field(&f, &state).unwrap();
            for i in 0..3 {
                let exact = eval_rational(f.component(i), &xr);
                assert!(rat(val[i].lo) <= exact && exact <= rat(val[i].hi));
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let f = random_field(&mut rng, 3, 5);
        let jac = jacobian(&f);
        for _ in 0..10 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let v: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let h = 1e-7;
            let xp: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let xm: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - h * b).collect();
            let fp = apply_field(&f, &xp).unwrap();
            let fm = apply_field(&f, &xm).unwrap();
            for i in 0..3 {
                let fd = (fp[i] - fm[i]) / (2.0 * h);
                let mut dv = 0.0;
                for j in 0..3 {
                    dv += eval_monomials(&jac[i][j], &x).unwrap() * v[j];
                }
                let scale = fd.abs().max(dv.abs()).max(1.0);
                assert!((fd - dv).abs() / scale < 1e-6, "fd {fd} vs dv {dv}");
            }
        }
    }

    #[test]
    fn jacobian_satisfies_euler_identity_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        let f = random_field(&mut rng, 3, 4);
        let jac = jacobian(&f);
        for _ in 0..5 {
            let xr: Vec<BigRational> = (0..3)
                .map(|_| {
                    BigRational::new(
                        BigInt::from(rng.gen_range(1..20i64)),
                        BigInt::from(rng.gen_range(1..20i64)),
                    )
                })
                .collect();
            for i in 0..3 {
                for j in 0..3 {
                    let dij = eval_rational(&jac[i][j], &xr);
                    let mut expect = BigRational::zero();
                    for m in f.component(i) {
                        let e = m.exps[j];
                        if e == 0 {
                            continue;
                        }
                        let mut term = rat(m.coef.mid()) * BigRational::from(BigInt::from(e));
                        for (l, &el) in m.exps.iter().enumerate() {
                            let reduced = if l == j { el - 1 } else { el };
                            for _ in 0..reduced {
                                term *= xr[l].clone();
                            }
                        }
                        expect += term;
                    }
                    assert_eq!(dij, expect, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn inflation_coeffs_dominate_sampled_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(64);
        for _ in 0..10 {
            let f = random_field(&mut rng, 3, 4);
            let x: Vec<f64> = (0..3).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let norms: Vec<RInterval> =
                x.iter().map(|&v| RInterval::point(v.abs())).collect();
            let monos = f.component(0);
            let coeffs = norm_inflation_coeffs(monos, &norms);
            let r = 0.1 + rng.gen::<f64>() * 0.5;
            let base = eval_monomials(monos, &x).unwrap();
            let mut bound = 0.0;
            for (d, c) in coeffs.iter().enumerate() {
                bound += c.hi * r.powi(d as i32 + 1);
            }
            for _ in 0..100 {
                let xp: Vec<f64> =
                    x.iter().map(|&v| v + (rng.gen::<f64>() * 2.0 - 1.0) * r).collect();
                let shifted = eval_monomials(monos, &xp).unwrap();
                assert!(
                    (shifted - base).abs() <= bound * (1.0 + 1e-9) + 1e-12,
                    "difference {} exceeds bound {bound}",
                    (shifted - base).abs()
                );
            }
        }
    }

    #[test]
    fn inflation_coeffs_are_exact_for_a_square() {
        let monos = vec![Monomial::new(RInterval::ONE, vec![2])];
        let norms = vec![RInterval::point(3.0)];
        let coeffs = norm_inflation_coeffs(&monos, &norms);
        assert_eq!(coeffs.len(), 2);
        assert!(coeffs[0].contains(6.0) && coeffs[0].width() < 1e-12);
        assert!(coeffs[1].contains(1.0) && coeffs[1].width() < 1e-12);
    }

    #[test]
    fn field_dimension_mismatches_are_rejected() {
        let f = PolynomialVectorField::new(
            2,
            vec![vec![Monomial::new(RInterval::ONE, vec![1, 0])], vec![]],
            Vec::new(),
        )
        .unwrap();
        assert!(apply_field(&f, &[RInterval::ONE]).is_err());
        assert!(PolynomialVectorField::new(
            2,
            vec![vec![Monomial::new(RInterval::ONE, vec![1])], vec![]],
            Vec::new(),
        )
        .is_err());
    }
}
