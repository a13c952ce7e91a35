//! Pointwise evaluation of Fourier-Taylor jets and dynamical diagnostics.
//!
//! The stored coefficients define `P(theta, sigma) = sum_alpha sigma^alpha
//! A_alpha(theta)` with each `A_alpha` a trigonometric polynomial. A point
//! on the local manifold is one evaluation; a whisker is a curve of fixed
//! `sigma` (or fixed `theta`); and the defining conjugacy says the flow
//! acts on parameters by `(theta, sigma) -> (theta + omega t, sigma
//! e^{lambda t})`, which gives two independent checks against direct
//! numerical integration.

use nalgebra::DVector;
use num_complex::Complex64;
use numerics::{integrate_sampled, FieldEval};
use orbit::{seq_of, FinSeq, SpectralProblem};

use crate::ManifoldError;

fn eval_angle_deriv(s: &FinSeq, theta: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in s.lo()..=s.hi() {
        acc += s.get(k) * Complex64::new(0.0, k as f64) * Complex64::new(0.0, k as f64 * theta).exp();
    }
    acc
}

/// Real state of the parameterization at angle `theta` and Taylor
/// parameter `sigma`. Conjugate-symmetric data makes every component real;
/// the imaginary rounding residue is discarded.
pub fn eval_state(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    theta: f64,
    sigma: f64,
) -> Vec<f64> {
    let lay = p.layout();
    (0..lay.n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut sp = 1.0;
            for alpha in 0..lay.orders {
                acc += sp * seq_of(x, &lay, alpha, i).eval_angle(theta);
                sp *= sigma;
            }
            acc.re
        })
        .collect()
}

/// Largest componentwise defect of the infinitesimal invariance equation
/// `omega dP/dtheta + lambda sigma dP/dsigma = f(P)` over an equispaced
/// angle grid at fixed `sigma`.
pub fn invariance_residual(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    n_theta: usize,
    sigma: f64,
) -> Result<f64, ManifoldError> {
    if n_theta == 0 {
        return Err(ManifoldError::Usage("need at least one grid angle".into()));
    }
    let lay = p.layout();
    let omega = x[lay.idx_omega()].re;
    let lambda = if lay.orders >= 2 { x[lay.idx_lambda()].re } else { 0.0 };
    let ev = FieldEval::new(&p.field);
    let mut worst = 0.0f64;
    let mut rhs = vec![0.0; lay.n];
    for t in 0..n_theta {
        let theta = std::f64::consts::TAU * t as f64 / n_theta as f64;
        let state = eval_state(p, x, theta, sigma);
        ev.eval(&state, &mut rhs);
        for i in 0..lay.n {
            let mut dth = Complex64::new(0.0, 0.0);
            let mut dsg = Complex64::new(0.0, 0.0);
            let mut sp = 1.0;
            for alpha in 0..lay.orders {
                let s = seq_of(x, &lay, alpha, i);
                dth += sp * eval_angle_deriv(&s, theta);
                if alpha >= 1 {
                    let spm = if alpha == 1 { 1.0 } else { sigma.powi(alpha as i32 - 1) };
                    dsg += alpha as f64 * spm * s.eval_angle(theta);
                }
                sp *= sigma;
            }
            let lhs = omega * dth.re + lambda * sigma * dsg.re;
            worst = worst.max((lhs - rhs[i]).abs());
        }
    }
    Ok(worst)
}

/// Distance between the integrated flow through `P(theta0, sigma0)` at
/// time `t` and the parameterized point `P(theta0 + omega t, sigma0
/// e^{lambda t})`. Negative times integrate the reversed field, which is
/// how stable-side jets are checked.
pub fn conjugacy_defect(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    theta0: f64,
    sigma0: f64,
    t: f64,
    tol: f64,
) -> Result<f64, ManifoldError> {
    let lay = p.layout();
    if lay.orders < 2 {
        return Err(ManifoldError::Usage("conjugacy check needs a bundle order".into()));
    }
    let omega = x[lay.idx_omega()].re;
    let lambda = x[lay.idx_lambda()].re;
    let start = eval_state(p, x, theta0, sigma0);
    let target = eval_state(p, x, theta0 + omega * t, sigma0 * (lambda * t).exp());
    let ev = FieldEval::new(&p.field);
    let sign = if t < 0.0 { -1.0 } else { 1.0 };
    let mut rhs = move |_t: f64, s: &[f64], out: &mut [f64]| {
        ev.eval(s, out);
        for v in out.iter_mut() {
            *v *= sign;
        }
    };
    let states = integrate_sampled(&mut rhs, &start, 0.0, &[t.abs()], tol)
        .map_err(|e| ManifoldError::Numerics(e.to_string()))?;
    let end = states.last().ok_or_else(|| ManifoldError::Numerics("empty trajectory".into()))?;
    Ok(end
        .iter()
        .zip(target.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
