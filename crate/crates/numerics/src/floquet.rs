//! Monodromy matrices, Floquet multiplier/eigenvector seeds, and the
//! shifted variational flow used to seed bundle coefficients.

use crate::ode::{integrate_rhs, FieldEval};
use crate::NumericsError;
use field::{jacobian, Monomial, PolynomialVectorField};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Pre-flattened Jacobian evaluator: entry `(i, j)` as a monomial list over
/// midpoint coefficients.
pub struct JacEval {
    dim: usize,
    entries: Vec<Vec<Vec<(f64, Vec<u32>)>>>,
}

impl JacEval {
    pub fn new(field: &PolynomialVectorField) -> Self {
        let sym = jacobian(field);
        let flatten = |monos: &Vec<Monomial>| {
            monos.iter().map(|m| (m.coef.mid(), m.exps.clone())).collect::<Vec<_>>()
        };
        let entries = sym
            .iter()
            .map(|row| row.iter().map(flatten).collect())
            .collect();
        JacEval { dim: field.dim(), entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes `Df(x)` into `out` (row-major `dim x dim`).
    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut acc = 0.0;
                for (c, exps) in &self.entries[i][j] {
                    let mut term = *c;
                    for (v, &e) in exps.iter().enumerate() {
                        for _ in 0..e {
                            term *= x[v];
                        }
                    }
                    acc += term;
                }
                out[i * self.dim + j] = acc;
            }
        }
    }
}

/// Integrates the variational flow over `[0, t]`: the state is `(x, Phi)`
/// with `Phi' = Df(x) Phi`, `Phi(0) = I`. Returns the monodromy-style
/// fundamental matrix `Phi(t)`.
pub fn transition_matrix(
    field: &PolynomialVectorField,
    x0: &[f64],
    t: f64,
    tol: f64,
) -> Result<DMatrix<f64>, NumericsError> {
    let n = field.dim();
    let fe = FieldEval::new(field);
    let je = JacEval::new(field);
    let mut jac = vec![0.0; n * n];
    let mut rhs = move |_t: f64, s: &[f64], out: &mut [f64]| {
        fe.eval(&s[..n], &mut out[..n]);
        je.eval(&s[..n], &mut jac);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for (k, jrow) in jac[i * n..(i + 1) * n].iter().enumerate() {
                    acc += jrow * s[n + k * n + j];
                }
                out[n + i * n + j] = acc;
            }
        }
    };
    let mut s0 = vec![0.0; n + n * n];
    s0[..n].copy_from_slice(x0);
    for i in 0..n {
        s0[n + i * n + i] = 1.0;
    }
    let traj = integrate_rhs(&mut rhs, &s0, 0.0, t, tol)?;
    let sf = traj.last_state();
    Ok(DMatrix::from_fn(n, n, |i, j| sf[n + i * n + j]))
}

/// Monodromy matrix of a periodic orbit candidate `(x0, period)`.
pub fn monodromy(
    field: &PolynomialVectorField,
    x0: &[f64],
    period: f64,
    tol: f64,
) -> Result<DMatrix<f64>, NumericsError> {
    transition_matrix(field, x0, period, tol)
}

/// An eigenvalue with a unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: DVector<Complex64>,
}

/// Full eigen decomposition of a real matrix: complex eigenvalues from the
/// Schur form, eigenvectors recovered by shifted inverse iteration.
pub fn eigen_decompose(m: &DMatrix<f64>) -> Result<Vec<EigenPair>, NumericsError> {
    let n = m.nrows();
    let values = m.clone().complex_eigenvalues();
    let mc = m.map(|v| Complex64::new(v, 0.0));
    let mut pairs = Vec::with_capacity(n);
    for idx in 0..n {
        let lam = values[idx];
        let scale = m.amax().max(1.0);
        let mut shift = lam;
        let mut vector = None;
        for attempt in 0..6 {
            let eps = 1e-10 * scale * 2f64.powi(attempt);
            let shifted = &mc
                - DMatrix::from_diagonal(&DVector::from_element(
                    n,
                    shift + Complex64::new(eps, eps),
                ));
            let lu = shifted.lu();
            let mut v = DVector::from_fn(n, |i, _| {
                Complex64::new(1.0 / (1.0 + i as f64), 0.5 / (1.0 + i as f64))
            });
            let mut ok = true;
            for _ in 0..50 {
                let Some(w) = lu.solve(&v) else {
                    ok = false;
                    break;
                };
                let norm = w.norm();
                if !norm.is_finite() || norm == 0.0 {
                    ok = false;
                    break;
                }
                let w = w / Complex64::new(norm, 0.0);
                let delta = (&w - &v).norm().min((&w + &v).norm());
                v = w;
                if delta < 1e-14 {
                    break;
                }
            }
            if ok {
                let residual = (&mc * &v - &v * lam).norm();
                if residual < 1e-6 * scale {
                    vector = Some(v);
                    break;
                }
            }
            shift = lam * Complex64::new(1.0 + 1e-8 * (attempt + 1) as f64, 0.0);
        }
        let vector = vector.ok_or_else(|| {
            NumericsError::Numerical(format!("inverse iteration failed for eigenvalue {lam}"))
        })?;
        pairs.push(EigenPair { value: lam, vector });
    }
    pairs.sort_by(|a, b| b.value.norm().total_cmp(&a.value.norm()));
    Ok(pairs)
}

/// Samples the shifted variational flow `w' = (Df(x(t)) - lambda I) w`
/// along the orbit through `x0`, returning `ns` uniform samples of `(x, w)`
/// over one period. For a Floquet eigenpair this `w(t)` is periodic and
/// seeds the bundle Fourier coefficients.
pub fn bundle_samples(
    field: &PolynomialVectorField,
    x0: &[f64],
    period: f64,
    lambda: f64,
    w0: &[f64],
    ns: usize,
    tol: f64,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>), NumericsError> {
    let n = field.dim();
    let fe = FieldEval::new(field);
    let je = JacEval::new(field);
    let mut jac = vec![0.0; n * n];
    let mut rhs = move |_t: f64, s: &[f64], out: &mut [f64]| {
        fe.eval(&s[..n], &mut out[..n]);
        je.eval(&s[..n], &mut jac);
        for i in 0..n {
            let mut acc = 0.0;
            for (k, jv) in jac[i * n..(i + 1) * n].iter().enumerate() {
                acc += jv * s[n + k];
            }
            out[n + i] = acc - lambda * s[n + i];
        }
    };
    let mut s0 = vec![0.0; 2 * n];
    s0[..n].copy_from_slice(x0);
    s0[n..].copy_from_slice(w0);
    let times: Vec<f64> = (0..ns).map(|j| period * j as f64 / ns as f64).collect();
    let states = crate::ode::integrate_sampled(&mut rhs, &s0, 0.0, &times, tol)?;
    let xs = states.iter().map(|s| s[..n].to_vec()).collect();
    let ws = states.iter().map(|s| s[n..].to_vec()).collect();
    Ok((xs, ws))
}

#[cfg(test)]
mod tests {
    use super::*;
    use field::PolynomialVectorField;
    use rigor::RInterval;

    fn linear_field(a: &[[f64; 2]; 2]) -> PolynomialVectorField {
        let mono = |c: f64, ex: [u32; 2]| Monomial {
            coef: RInterval::point(c),
            exps: ex.to_vec(),
        };
        PolynomialVectorField::new(
            2,
            vec![
                vec![mono(a[0][0], [1, 0]), mono(a[0][1], [0, 1])],
                vec![mono(a[1][0], [1, 0]), mono(a[1][1], [0, 1])],
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn constant_linear_field_monodromy_is_matrix_exponential() {
        let f = linear_field(&[[0.3, 0.0], [0.0, -0.7]]);
        let t = 1.7;
        let m = monodromy(&f, &[0.4, -0.2], t, 1e-12).unwrap();
        assert!((m[(0, 0)] - (0.3f64 * t).exp()).abs() < 1e-9);
        assert!((m[(1, 1)] - (-0.7f64 * t).exp()).abs() < 1e-9);
        assert!(m[(0, 1)].abs() < 1e-10 && m[(1, 0)].abs() < 1e-10);
    }

    #[test]
    fn rotation_monodromy_is_rotation_matrix() {
        let f = linear_field(&[[0.0, 1.0], [-1.0, 0.0]]);
        let t = 0.9;
        let m = monodromy(&f, &[1.0, 1.0], t, 1e-12).unwrap();
        assert!((m[(0, 0)] - t.cos()).abs() < 1e-10);
        assert!((m[(0, 1)] - t.sin()).abs() < 1e-10);
        assert!((m[(1, 0)] + t.sin()).abs() < 1e-10);
        assert!((m[(1, 1)] - t.cos()).abs() < 1e-10);
    }

    #[test]
    fn eigen_decompose_recovers_known_spectrum() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, -1.0, 0.5, 0.0, 0.0, 0.25]);
        let pairs = eigen_decompose(&m).unwrap();
        let mut values: Vec<f64> = pairs.iter().map(|p| p.value.re).collect();
        values.sort_by(f64::total_cmp);
        assert!((values[0] + 1.0).abs() < 1e-10);
        assert!((values[1] - 0.25).abs() < 1e-10);
        assert!((values[2] - 2.0).abs() < 1e-10);
        for p in &pairs {
            let mc = m.map(|v| Complex64::new(v, 0.0));
            let res = (&mc * &p.vector - &p.vector * p.value).norm();
            assert!(res < 1e-8, "eigen residual {res} for {}", p.value);
        }
    }

    #[test]
    fn eigen_decompose_handles_complex_pairs() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let pairs = eigen_decompose(&m).unwrap();
        for p in &pairs {
            assert!((p.value.norm() - 1.0).abs() < 1e-12);
            assert!(p.value.im.abs() > 0.9);
        }
    }

    #[test]
    fn shifted_variational_flow_freezes_an_eigenvector() {
        let f = linear_field(&[[0.5, 0.0], [0.0, -0.25]]);
        let (_, ws) =
            bundle_samples(&f, &[0.1, 0.1], 2.0, 0.5, &[1.0, 0.0], 16, 1e-12).unwrap();
        for w in &ws {
            assert!((w[0] - 1.0).abs() < 1e-9, "w = {w:?}");
            assert!(w[1].abs() < 1e-9);
        }
    }
}
