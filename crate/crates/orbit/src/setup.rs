//! Seeding: turn floating-point trajectory data into spectral problems and
//! starting vectors for the Newton stages.

use field::systems::HillSystem;
use field::PolynomialVectorField;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use numerics::ode::FieldEval;
use numerics::{
    bundle_samples, eigen_decompose, fit_fourier, hill_lyapunov, integrate_sampled, monodromy,
    seed_by_symbols, shoot_periodic,
};

use crate::finseq::FinSeq;
use crate::newton::{newton_stage, seq_of, store_seq, NewtonOptions};
use crate::problem::{
    bundle_norm_row, energy_row, phase_row, radial_constraint_row, SpectralProblem, Unfolding,
};
use crate::OrbitError;

/// A seeded problem: the truncated map, a starting vector for its Newton
/// stages, and the trajectory data the seed came from.
#[derive(Clone, Debug)]
pub struct OrbitSeed {
    pub problem: SpectralProblem,
    pub x: DVector<Complex64>,
    pub period: f64,
    pub section_state: Vec<f64>,
}

fn zc(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn sample_count(m: i64) -> usize {
    ((4 * m).max(256) as usize).next_power_of_two()
}

/// Uniform samples of one period starting at `x0`.
fn sampled_period(
    field: &PolynomialVectorField,
    x0: &[f64],
    period: f64,
    ns: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>, OrbitError> {
    let fe = FieldEval::new(field);
    let mut rhs = move |_t: f64, x: &[f64], out: &mut [f64]| fe.eval(x, out);
    let times: Vec<f64> = (0..ns).map(|j| period * j as f64 / ns as f64).collect();
    Ok(integrate_sampled(&mut rhs, x0, 0.0, &times, tol)?)
}

/// Phase-plane data at the anchor point: the row normal is the flow
/// direction there, so the pinned plane is transverse to the orbit.
fn phase_data(field: &PolynomialVectorField, anchor: &[f64]) -> (Vec<f64>, f64) {
    let fe = FieldEval::new(field);
    let mut normal = vec![0.0; field.dim()];
    fe.eval(anchor, &mut normal);
    let value = normal.iter().zip(anchor).map(|(n, a)| n * a).sum();
    (normal, value)
}

/// Build the order-0 problem and seed vector from a converged shooting
/// solution of a periodic orbit through `x0` with the given period.
pub fn orbit_from_shooting(
    field: &PolynomialVectorField,
    x0_guess: &[f64],
    period_guess: f64,
    m: i64,
    nu: f64,
    unfolding: Option<(Unfolding, Vec<crate::problem::ScalarRow>)>,
    tol: f64,
) -> Result<OrbitSeed, OrbitError> {
    let (x0, period) = shoot_periodic(field, x0_guess, period_guess, tol)?;
    let ns = sample_count(m);
    let states = sampled_period(field, &x0, period, ns, tol)?;
    let fit = fit_fourier(&states, period, (m - 1) as usize)?;
    let (normal, value) = phase_data(field, &x0);
    let n = field.dim();
    let mut rows = vec![phase_row(&normal, value, m, n)];
    let unfold = match unfolding {
        Some((u, extra)) => {
            rows.extend(extra);
            Some(u)
        }
        None => None,
    };
    let problem = SpectralProblem::new(field.clone(), m, nu, 1, rows, unfold)?;
    let lay = problem.layout();
    let mut x = DVector::from_element(lay.total(), zc(0.0));
    x[lay.idx_omega()] = zc(fit.omega);
    for i in 0..n {
        let seq = FinSeq::from_one_sided(&fit.coeffs[i]);
        store_seq(&mut x, &lay, 0, i, &seq.truncated(m));
    }
    Ok(OrbitSeed { problem, x, period, section_state: x0 })
}

/// Seed a three-component orbit from a symbol itinerary: scan a transient
/// trajectory for a recurrent window whose local maxima of the third
/// component spell the target word, shoot, and fit.
pub fn orbit_from_symbols(
    field: &PolynomialVectorField,
    start: &[f64],
    transient: f64,
    horizon: f64,
    symbols: &str,
    m: i64,
    nu: f64,
    tol: f64,
) -> Result<OrbitSeed, OrbitError> {
    let symbol_of = |s: &[f64]| if s[0] < 0.0 { 'A' } else { 'B' };
    let seed = seed_by_symbols(field, start, transient, horizon, 2, &symbol_of, symbols, tol)?;
    orbit_from_shooting(field, &seed.x0, seed.period, m, nu, None, tol)
}

/// Seed the planar-symmetric periodic orbit of the embedded five-component
/// system at Jacobi constant `c`, with the unfolding parameters attached.
pub fn hill_orbit(
    sys: &HillSystem,
    x0_guess: f64,
    c: f64,
    m: i64,
    nu: f64,
    tol: f64,
) -> Result<OrbitSeed, OrbitError> {
    let field = sys.field();
    let (state, period) = hill_lyapunov(sys, x0_guess, c, tol)?;
    let ns = sample_count(m);
    let states = sampled_period(&field, &state, period, ns, tol)?;
    let fit = fit_fourier(&states, period, (m - 1) as usize)?;
    let (normal, value) = phase_data(&field, &state);
    let rows = vec![
        phase_row(&normal, value, m, 5),
        radial_constraint_row(5),
        energy_row(sys.lambda1, sys.lambda2, c, 5),
    ];
    let problem =
        SpectralProblem::new(field, m, nu, 1, rows, Some(Unfolding { cube_comp: 4 }))?;
    let lay = problem.layout();
    let mut x = DVector::from_element(lay.total(), zc(0.0));
    x[lay.idx_omega()] = zc(fit.omega);
    for i in 0..5 {
        let seq = FinSeq::from_one_sided(&fit.coeffs[i]);
        store_seq(&mut x, &lay, 0, i, &seq.truncated(m));
    }
    Ok(OrbitSeed { problem, x, period, section_state: state })
}

/// Which Floquet direction to attach.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BundleSide {
    Unstable,
    Stable,
}

/// Numerical data of the selected Floquet direction.
#[derive(Clone, Debug)]
pub struct BundleSeed {
    pub side: BundleSide,
    pub multiplier: f64,
    pub lambda: f64,
    pub amplitude: f64,
}

/// Select the extreme real multiplier on the requested side of the unit
/// circle. A negative real multiplier means the bundle is non-orientable
/// and the parameterization over a single angle does not exist; that is an
/// error, not a fallback.
fn select_multiplier(
    mono: &DMatrix<f64>,
    side: BundleSide,
) -> Result<(f64, DVector<f64>), OrbitError> {
    let pairs = eigen_decompose(mono)?;
    let pick = match side {
        BundleSide::Unstable => pairs
            .iter()
            .find(|p| p.value.norm() > 1.0 + 1e-4),
        BundleSide::Stable => pairs
            .iter()
            .rev()
            .find(|p| p.value.norm() < 1.0 - 1e-4),
    };
    let pair = pick.ok_or_else(|| {
        OrbitError::Numerics(format!("no {side:?} multiplier off the unit circle"))
    })?;
    let v = pair.value;
    if v.im.abs() > 1e-8 * v.norm() {
        return Err(OrbitError::Numerics(format!(
            "{side:?} multiplier {v} is not real; a complex pair has no one-angle bundle"
        )));
    }
    if v.re < 0.0 {
        return Err(OrbitError::Numerics(format!(
            "{side:?} multiplier {} is negative: the bundle is non-orientable",
            v.re
        )));
    }
    let (idx, _) = pair
        .vector
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty eigenvector");
    let rot = pair.vector[idx].conj() / pair.vector[idx].norm();
    let mut w = DVector::from_element(pair.vector.len(), 0.0);
    let mut imag = 0.0f64;
    for (i, z) in pair.vector.iter().enumerate() {
        let r = z * rot;
        w[i] = r.re;
        imag = imag.max(r.im.abs());
    }
    if imag > 1e-6 {
        return Err(OrbitError::Numerics(format!(
            "eigenvector of real multiplier has imaginary residue {imag:.3e}"
        )));
    }
    let norm = w.norm();
    Ok((v.re, w / norm))
}

/// Extend a solved order-0 problem and vector to the order-1 bundle
/// problem, seeding `lambda` and the bundle coefficients from the monodromy
/// eigenpair and running the order-1 Newton stage. The bundle is scaled to
/// unit weighted norm times `scale`, and the amplitude row constant is the
/// squared component-sum at that scaling.
pub fn attach_bundle(
    problem: &SpectralProblem,
    x: &DVector<Complex64>,
    period: f64,
    section_state: &[f64],
    side: BundleSide,
    scale: f64,
    tol: f64,
) -> Result<(SpectralProblem, DVector<Complex64>, BundleSeed), OrbitError> {
    if problem.orders != 1 {
        return Err(OrbitError::Usage("bundle attaches to an order-0 problem".into()));
    }
    let field = &problem.field;
    let n = problem.n;
    let m = problem.m;
    let mono = monodromy(field, section_state, period, tol)?;
    let (multiplier, w0) = select_multiplier(&mono, side)?;
    let lambda = multiplier.ln() / period;
    let ns = sample_count(m);
    let (_, ws) = bundle_samples(
        field,
        section_state,
        period,
        lambda,
        w0.as_slice(),
        ns,
        tol,
    )?;
    let fit = fit_fourier(&ws, period, (m - 1) as usize)?;

    let mut seqs: Vec<FinSeq> = (0..n)
        .map(|i| FinSeq::from_one_sided(&fit.coeffs[i]).truncated(m))
        .collect();
    let total_norm: f64 = seqs.iter().map(|s| s.norm(problem.nu)).sum();
    if !(total_norm > 0.0) {
        return Err(OrbitError::Numerics("bundle seed has zero norm".into()));
    }
    let factor = scale / total_norm;
    for s in seqs.iter_mut() {
        *s = field::CoeffAlgebra::scale_real(s, rigor::RInterval::point(factor));
    }
    let mut l_value = Complex64::new(0.0, 0.0);
    for s in &seqs {
        let mut sum = Complex64::new(0.0, 0.0);
        for k in -(m - 1)..=(m - 1) {
            sum += s.get(k);
        }
        l_value += sum * sum;
    }
    if l_value.im.abs() > 1e-10 * (1.0 + l_value.re.abs()) {
        return Err(OrbitError::Numerics("amplitude constant is not real".into()));
    }
    if l_value.re.abs() < 1e-10 {
        return Err(OrbitError::Numerics(
            "amplitude row degenerates: component sums of the bundle vanish".into(),
        ));
    }

    let p2 = problem.with_orders(2, vec![bundle_norm_row(l_value.re, m, n)])?;
    let lay1 = problem.layout();
    let lay2 = p2.layout();
    let mut x2 = DVector::from_element(lay2.total(), zc(0.0));
    x2[lay2.idx_omega()] = x[lay1.idx_omega()];
    if lay1.unfold {
        x2[lay2.idx_beta(0)] = x[lay1.idx_beta(0)];
        x2[lay2.idx_beta(1)] = x[lay1.idx_beta(1)];
    }
    for i in 0..n {
        let s = seq_of(x, &lay1, 0, i);
        store_seq(&mut x2, &lay2, 0, i, &s);
    }
    x2[lay2.idx_lambda()] = zc(lambda);
    for (i, s) in seqs.iter().enumerate() {
        store_seq(&mut x2, &lay2, 1, i, s);
    }
    newton_stage(&p2, &mut x2, 1, NewtonOptions::default())?;
    Ok((
        p2,
        x2,
        BundleSeed { side, multiplier, lambda, amplitude: l_value.re },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::{newton_stage, residual};
    use field::systems::lorenz_classic;
    use rigor::RInterval;

    /// End to end at small mode count: seed the short symmetric orbit of
    /// the classic quadratic flow, run the order-0 Newton stage, and check
    /// the truncated residual drops to the fitting floor.
    #[test]
    fn lorenz_short_orbit_seeds_and_refines() {
        let f = lorenz_classic();
        let seed =
            orbit_from_symbols(&f, &[-3.0, 4.0, 15.0], 30.0, 60.0, "AB", 40, 1.0, 1e-12).unwrap();
        let mut x = seed.x.clone();
        let res = newton_stage(&seed.problem, &mut x, 0, NewtonOptions::default()).unwrap();
        assert!(res < 1e-12, "refined residual {res:.3e}");
        let lay = seed.problem.layout();
        let omega = x[lay.idx_omega()].re;
        let period = std::f64::consts::TAU / omega;
        assert!(
            (period - seed.period).abs() < 1e-8,
            "spectral period {period} vs shooting period {}",
            seed.period
        );
        for i in 0..3 {
            let s = seq_of(&x, &lay, 0, i);
            for k in 1..40 {
                assert!((s.get(k) - s.get(-k).conj()).norm() < 1e-14);
            }
        }
    }

    /// The unstable bundle of the short orbit: multiplier matches the
    /// monodromy spectrum, the order-1 stage converges, and the resulting
    /// coefficients satisfy the shifted variational equation spectrally.
    #[test]
    fn lorenz_unstable_bundle_attaches() {
        let f = lorenz_classic();
        let seed =
            orbit_from_symbols(&f, &[-3.0, 4.0, 15.0], 30.0, 60.0, "AB", 48, 1.0, 1e-12).unwrap();
        let mut x = seed.x.clone();
        newton_stage(&seed.problem, &mut x, 0, NewtonOptions::default()).unwrap();
        let (p2, x2, info) = attach_bundle(
            &seed.problem,
            &x,
            seed.period,
            &seed.section_state,
            BundleSide::Unstable,
            1.0,
            1e-12,
        )
        .unwrap();
        assert!(info.multiplier > 1.5, "unstable multiplier {}", info.multiplier);
        assert!(info.lambda > 0.0);
        let r = residual(&p2, &x2).unwrap();
        let lay = p2.layout();
        let worst = (0..lay.block_size(1))
            .map(|j| r[lay.block_start(1) + j].norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-11, "bundle residual {worst:.3e}");
        let lam = x2[lay.idx_lambda()];
        assert!((lam.re - info.multiplier.ln() / seed.period).abs() < 1e-6);
        assert!(lam.im.abs() < 1e-12);
    }

    /// Doubling the bundle scale doubles the bundle coefficients once the
    /// amplitude constant is scaled by four: the order-1 equation is
    /// homogeneous in the bundle.
    #[test]
    fn bundle_scaling_is_homogeneous() {
        let f = lorenz_classic();
        let seed =
            orbit_from_symbols(&f, &[-3.0, 4.0, 15.0], 30.0, 60.0, "AB", 32, 1.0, 1e-12).unwrap();
        let mut x = seed.x.clone();
        newton_stage(&seed.problem, &mut x, 0, NewtonOptions::default()).unwrap();
        let (p_a, x_a, info_a) = attach_bundle(
            &seed.problem,
            &x,
            seed.period,
            &seed.section_state,
            BundleSide::Unstable,
            1.0,
            1e-12,
        )
        .unwrap();
        let (_, x_b, info_b) = attach_bundle(
            &seed.problem,
            &x,
            seed.period,
            &seed.section_state,
            BundleSide::Unstable,
            2.0,
            1e-12,
        )
        .unwrap();
        assert!((info_b.amplitude - 4.0 * info_a.amplitude).abs() < 1e-8 * info_a.amplitude.abs());
        let lay = p_a.layout();
        for i in 0..3 {
            let sa = seq_of(&x_a, &lay, 1, i);
            let sb = seq_of(&x_b, &lay, 1, i);
            for k in -(lay.m - 1)..=(lay.m - 1) {
                assert!((sb.get(k) - 2.0 * sa.get(k)).norm() < 1e-9);
            }
        }
        let _ = RInterval::ONE;
    }
}
