//! Shooting methods: periodic-orbit Newton refinement, recurrence seeding
//! by symbol sequences of component maxima, and differential correction of
//! symmetric orbits on an energy level.

use crate::floquet::transition_matrix;
use crate::ode::{flow_to_event, integrate_rhs, FieldEval};
use crate::NumericsError;
use field::{HillSystem, PolynomialVectorField};
use nalgebra::{DMatrix, DVector};

/// Newton-refines `(x0, period)` so that the flow returns exactly:
/// `phi_T(x0) = x0`, with the phase fixed by requiring the update to stay
/// orthogonal to the flow direction at the anchor point.
pub fn shoot_periodic(
    field: &PolynomialVectorField,
    x0_guess: &[f64],
    period_guess: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64), NumericsError> {
    let n = field.dim();
    let fe = FieldEval::new(field);
    let mut x0 = x0_guess.to_vec();
    let mut period = period_guess;
    let mut anchor_dir = vec![0.0; n];
    fe.eval(&x0, &mut anchor_dir);
    let anchor = x0.clone();

    for _ in 0..40 {
        let phi = transition_matrix(field, &x0, period, tol)?;
        let traj = integrate(field, &x0, period, tol)?;
        let xt = traj.last_state();
        let mut fxt = vec![0.0; n];
        fe.eval(xt, &mut fxt);

        let mut resid = DVector::zeros(n + 1);
        for i in 0..n {
            resid[i] = xt[i] - x0[i];
        }
        resid[n] = anchor_dir
            .iter()
            .zip(x0.iter().zip(&anchor))
            .map(|(d, (x, a))| d * (x - a))
            .sum();

        let rnorm = resid.amax();
        if rnorm < 1e-12 * (1.0 + x0.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            return Ok((x0, period));
        }

        let mut jac = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = phi[(i, j)] - if i == j { 1.0 } else { 0.0 };
            }
            jac[(i, n)] = fxt[i];
            jac[(n, i)] = anchor_dir[i];
        }
        let delta = jac
            .lu()
            .solve(&resid)
            .ok_or_else(|| NumericsError::Numerical("singular shooting Jacobian".into()))?;
        for i in 0..n {
            x0[i] -= delta[i];
        }
        period -= delta[n];
        if !(period > 0.0) {
            return Err(NumericsError::Numerical("shooting drove the period nonpositive".into()));
        }
    }
    Err(NumericsError::MaxIterations("periodic shooting did not converge".into()))
}

fn integrate(
    field: &PolynomialVectorField,
    x0: &[f64],
    t: f64,
    tol: f64,
) -> Result<crate::ode::FloatTrajectory, NumericsError> {
    crate::ode::integrate(field, x0, 0.0, t, tol)
}

/// A recurrence candidate found by scanning symbol sequences.
#[derive(Debug, Clone)]
pub struct SymbolSeed {
    pub x0: Vec<f64>,
    pub period: f64,
    pub symbols: String,
    pub gap: f64,
}

/// Seeds a periodic orbit with a prescribed symbol sequence. Events are the
/// local maxima of component `comp` (where its derivative crosses zero
/// falling); each event is labelled by `symbol_of` on the event state. The
/// scan looks for an event whose label window matches `target` and whose
/// state recurs after `target.len()` further events, returning the best
/// (smallest-gap) candidate.
pub fn seed_by_symbols(
    field: &PolynomialVectorField,
    x_start: &[f64],
    transient: f64,
    horizon: f64,
    comp: usize,
    symbol_of: &dyn Fn(&[f64]) -> char,
    target: &str,
    tol: f64,
) -> Result<SymbolSeed, NumericsError> {
    let fe = FieldEval::new(field);
    let n = field.dim();
    let settled = integrate_rhs(
        &mut |_t, x, out| fe.eval(x, out),
        x_start,
        0.0,
        transient,
        tol,
    )?;
    let mut state = settled.last_state().to_vec();
    let mut t = 0.0;
    let mut events: Vec<(f64, Vec<f64>, char)> = Vec::new();
    let mut scratch = vec![0.0; n];
    let deriv = |_t: f64, x: &[f64]| {
        let mut out = vec![0.0; x.len()];
        FieldEval::new(field).eval(x, &mut out);
        out[comp]
    };
    while t < horizon {
        let hit = flow_to_event(
            &mut |_t, x, out| fe.eval(x, out),
            &state,
            t,
            horizon,
            tol,
            -1,
            &deriv,
            t + 1e-3,
        )?;
        let Some(hit) = hit else { break };
        fe.eval(&hit.state, &mut scratch);
        events.push((hit.t, hit.state.clone(), symbol_of(&hit.state)));
        state = hit.state;
        t = hit.t;
    }
    let w = target.len();
    if events.len() < w + 1 {
        return Err(NumericsError::Seed(format!(
            "only {} labelled events found before t = {horizon}",
            events.len()
        )));
    }
    let symbols: String = events.iter().map(|e| e.2).collect();
    let mut best: Option<SymbolSeed> = None;
    for i in 0..events.len() - w {
        if &symbols[i..i + w] != target {
            continue;
        }
        let a = &events[i];
        let b = &events[i + w];
        let gap = a
            .1
            .iter()
            .zip(&b.1)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max);
        if best.as_ref().is_none_or(|s| gap < s.gap) {
            best = Some(SymbolSeed {
                x0: a.1.clone(),
                period: b.0 - a.0,
                symbols: target.to_string(),
                gap,
            });
        }
    }
    best.ok_or_else(|| {
        NumericsError::Seed(format!(
            "no window matching '{target}' in observed symbols '{symbols}'"
        ))
    })
}

/// State of a symmetric Hill candidate on the section `y = 0` at Jacobi
/// constant `c`: perpendicular crossing `(x0, 0, 0, q0, 1/|x0|)` with `q0`
/// from the energy relation.
pub fn hill_section_state(sys: &HillSystem, x0: f64, c: f64) -> Result<Vec<f64>, NumericsError> {
    if x0 == 0.0 {
        return Err(NumericsError::Usage("x0 = 0 is the collision".into()));
    }
    let z0 = 1.0 / x0.abs();
    let lambda2 = sys.lambda2.mid();
    let q0sq = lambda2 * x0 * x0 + 2.0 * z0 - c;
    if q0sq <= 0.0 {
        return Err(NumericsError::Seed(format!(
            "section point x0 = {x0} is outside the Hill region at C = {c}"
        )));
    }
    Ok(vec![x0, 0.0, 0.0, q0sq.sqrt(), z0])
}

/// Differential correction of a symmetric Lyapunov orbit of the embedded
/// Hill system at Jacobi constant `c`: Newton on the section coordinate
/// `x0` so that the next perpendicular crossing has `p = 0`. Returns the
/// full-period candidate `(state, period)`.
pub fn hill_lyapunov(
    sys: &HillSystem,
    x0_guess: f64,
    c: f64,
    tol: f64,
) -> Result<(Vec<f64>, f64), NumericsError> {
    let field = sys.field();
    let fe = FieldEval::new(&field);
    let half_p = |x0: f64| -> Result<(f64, f64), NumericsError> {
        let s0 = hill_section_state(sys, x0, c)?;
        let hit = flow_to_event(
            &mut |_t, x, out| fe.eval(x, out),
            &s0,
            0.0,
            50.0,
            tol,
            0,
            &|_t, x| x[1],
            1e-2,
        )?
        .ok_or_else(|| NumericsError::Seed("no return to the section y = 0".into()))?;
        Ok((hit.state[2], hit.t))
    };
    let mut x0 = x0_guess;
    for _ in 0..60 {
        let (p, t_half) = half_p(x0)?;
        if p.abs() < 1e-12 {
            let s0 = hill_section_state(sys, x0, c)?;
            return Ok((s0, 2.0 * t_half));
        }
        let h = 1e-7 * (1.0 + x0.abs());
        let (p_plus, _) = half_p(x0 + h)?;
        let dp = (p_plus - p) / h;
        if dp == 0.0 || !dp.is_finite() {
            return Err(NumericsError::Numerical("flat correction derivative".into()));
        }
        let step = (p / dp).clamp(-0.05, 0.05);
        x0 -= step;
    }
    Err(NumericsError::MaxIterations("Hill differential correction did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{eigen_decompose, monodromy};
    use field::{hill_embedded, lorenz};
    use rigor::RInterval;

    fn lorenz_classic() -> PolynomialVectorField {
        lorenz(
            RInterval::point(10.0),
            RInterval::point(28.0),
            RInterval::point(8.0 / 3.0),
        )
    }

    fn lorenz_symbol(state: &[f64]) -> char {
        if state[0] < 0.0 {
            'A'
        } else {
            'B'
        }
    }

    #[test]
    fn lorenz_ab_orbit_shoots_to_machine_precision() {
        let f = lorenz_classic();
        let seed = seed_by_symbols(
            &f,
            &[-3.0, 4.0, 15.0],
            30.0,
            60.0,
            2,
            &lorenz_symbol,
            "AB",
            1e-10,
        )
        .expect("AB recurrence visible within the horizon");
        assert!(seed.gap < 2.0, "recurrence gap {}", seed.gap);
        let (x0, period) = shoot_periodic(&f, &seed.x0, seed.period, 1e-12).unwrap();
        assert!((period - seed.period).abs() < 0.5);
        assert!(period > 1.0 && period < 2.0, "AB period {period}");

        let traj = crate::ode::integrate(&f, &x0, 0.0, period, 1e-12).unwrap();
        let ret = traj.last_state();
        for i in 0..3 {
            assert!((ret[i] - x0[i]).abs() < 1e-9, "return error at {i}");
        }

        let m = monodromy(&f, &x0, period, 1e-12).unwrap();
        let pairs = eigen_decompose(&m).unwrap();
        let unit_err = pairs
            .iter()
            .map(|p| (p.value.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(unit_err < 1e-6, "phase multiplier error {unit_err}");
        let unstable = pairs.iter().filter(|p| p.value.norm() > 1.0 + 1e-3).count();
        assert_eq!(unstable, 1, "AB orbit has exactly one unstable multiplier");
    }

    #[test]
    fn hill_lyapunov_at_c4_has_reciprocal_multipliers() {
        let sys = HillSystem::new(RInterval::ZERO).unwrap();
        let (x0, period) = hill_lyapunov(&sys, 0.45, 4.0, 1e-12).unwrap();
        assert!(period > 0.5 && period < 10.0, "period {period}");

        let f = hill_embedded(RInterval::ZERO).unwrap();
        let traj = crate::ode::integrate(&f, &x0, 0.0, period, 1e-12).unwrap();
        let ret = traj.last_state();
        for i in 0..5 {
            assert!((ret[i] - x0[i]).abs() < 1e-8, "return error at {i}: {ret:?} vs {x0:?}");
        }

        let m = monodromy(&f, &x0, period, 1e-12).unwrap();
        let pairs = eigen_decompose(&m).unwrap();
        let big = pairs[0].value.norm();
        assert!(big > 1.5, "Lyapunov orbit at C=4 is unstable, got {big}");
        let recip = pairs
            .iter()
            .map(|p| (p.value.norm() * big - 1.0).abs() / big)
            .fold(f64::INFINITY, f64::min);
        let has_inverse = pairs
            .iter()
            .any(|p| ((p.value.norm() - 1.0 / big).abs()) < 1e-6 * big.max(1.0));
        assert!(has_inverse, "multipliers {:?} lack the reciprocal of {big}, best {recip}",
            pairs.iter().map(|p| p.value).collect::<Vec<_>>());
    }

    #[test]
    fn section_state_respects_energy_and_constraint() {
        let sys = HillSystem::new(RInterval::ZERO).unwrap();
        let s = hill_section_state(&sys, 0.45, 4.0).unwrap();
        let r = (s[0] * s[0] + s[1] * s[1]).sqrt();
        assert!((r * r * s[4] * s[4] - 1.0).abs() < 1e-12);
        let j = 3.0 * s[0] * s[0] - s[2] * s[2] - s[3] * s[3] + 2.0 * s[4];
        assert!((j - 4.0).abs() < 1e-12);
        assert!(hill_section_state(&sys, 0.0, 4.0).is_err());
        assert!(hill_section_state(&sys, 1.2, 9.0).is_err());
    }
}
