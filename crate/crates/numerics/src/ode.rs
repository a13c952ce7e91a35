//! Adaptive Runge-Kutta-Fehlberg 7(8) integration with exact sample-time
//! hits and scalar event location.
//!
//! Everything in this module is plain floating point. Outputs feed the
//! rigorous pipeline only as Newton seeds or as oracle cross-checks.

use crate::NumericsError;
use field::PolynomialVectorField;

/// Pre-flattened polynomial field evaluator: one `(coefficient, exponents)`
/// list per component, no allocation per call.
pub struct FieldEval {
    dim: usize,
    comps: Vec<Vec<(f64, Vec<u32>)>>,
}

impl FieldEval {
    pub fn new(field: &PolynomialVectorField) -> Self {
        let comps = field
            .components()
            .iter()
            .map(|monos| {
                monos
                    .iter()
                    .map(|m| (m.coef.mid(), m.exps.clone()))
                    .collect()
            })
            .collect();
        FieldEval { dim: field.dim(), comps }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64], out: &mut [f64]) {
        for (i, monos) in self.comps.iter().enumerate() {
            let mut acc = 0.0;
            for (c, exps) in monos {
                let mut term = *c;
                for (j, &e) in exps.iter().enumerate() {
                    for _ in 0..e {
                        term *= x[j];
                    }
                }
                acc += term;
            }
            out[i] = acc;
        }
    }
}

/// A time grid with one state row per time.
#[derive(Debug, Clone)]
pub struct FloatTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub tol: f64,
}

impl FloatTrajectory {
    pub fn new(tol: f64) -> Self {
        FloatTrajectory { times: Vec::new(), states: Vec::new(), tol }
    }

    pub fn push(&mut self, t: f64, x: &[f64]) -> Result<(), NumericsError> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(NumericsError::Usage(format!(
                    "non-monotone time grid: {t} after {last}"
                )));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Numerical("non-finite state".into()));
        }
        self.times.push(t);
        self.states.push(x.to_vec());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("empty trajectory")
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }
}

const STAGES: usize = 13;

const C: [f64; STAGES] = [
    0.0,
    2.0 / 27.0,
    1.0 / 9.0,
    1.0 / 6.0,
    5.0 / 12.0,
    0.5,
    5.0 / 6.0,
    1.0 / 6.0,
    2.0 / 3.0,
    1.0 / 3.0,
    1.0,
    0.0,
    1.0,
];

const A: [[f64; 12]; STAGES] = [
    [0.0; 12],
    [2.0 / 27.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 36.0, 1.0 / 12.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 24.0, 0.0, 1.0 / 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.0 / 12.0, 0.0, -25.0 / 16.0, 25.0 / 16.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 20.0, 0.0, 0.0, 0.25, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        -25.0 / 108.0,
        0.0,
        0.0,
        125.0 / 108.0,
        -65.0 / 27.0,
        125.0 / 54.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        31.0 / 300.0,
        0.0,
        0.0,
        0.0,
        61.0 / 225.0,
        -2.0 / 9.0,
        13.0 / 900.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2.0,
        0.0,
        0.0,
        -53.0 / 6.0,
        704.0 / 45.0,
        -107.0 / 9.0,
        67.0 / 90.0,
        3.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        -91.0 / 108.0,
        0.0,
        0.0,
        23.0 / 108.0,
        -976.0 / 135.0,
        311.0 / 54.0,
        -19.0 / 60.0,
        17.0 / 6.0,
        -1.0 / 12.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        2383.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -301.0 / 82.0,
        2133.0 / 4100.0,
        45.0 / 82.0,
        45.0 / 164.0,
        18.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        3.0 / 205.0,
        0.0,
        0.0,
        0.0,
        0.0,
        -6.0 / 41.0,
        -3.0 / 205.0,
        -3.0 / 41.0,
        3.0 / 41.0,
        6.0 / 41.0,
        0.0,
        0.0,
    ],
    [
        -1777.0 / 4100.0,
        0.0,
        0.0,
        -341.0 / 164.0,
        4496.0 / 1025.0,
        -289.0 / 82.0,
        2193.0 / 4100.0,
        51.0 / 82.0,
        33.0 / 164.0,
        12.0 / 41.0,
        0.0,
        1.0,
    ],
];

const B8: [f64; STAGES] = [
    0.0,
    0.0,
    0.0,
    0.0,
    0.0,
    34.0 / 105.0,
    9.0 / 35.0,
    9.0 / 35.0,
    9.0 / 280.0,
    9.0 / 280.0,
    0.0,
    41.0 / 840.0,
    41.0 / 840.0,
];

/// One RKF78 step from `(t, x)` with step `h`. Writes the 8th-order result
/// into `out` and returns the embedded error estimate (max-norm).
pub fn rkf78_step(
    rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]),
    t: f64,
    x: &[f64],
    h: f64,
    out: &mut [f64],
) -> f64 {
    let n = x.len();
    let mut k = vec![vec![0.0; n]; STAGES];
    let mut stage = vec![0.0; n];
    rhs(t, x, &mut k[0]);
    for s in 1..STAGES {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    acc += a * kj[i];
                }
            }
            stage[i] = x[i] + h * acc;
        }
        let ks = &mut k[s];
        rhs(t + C[s] * h, &stage, ks);
    }
    for i in 0..n {
        let mut acc = 0.0;
        for (s, ks) in k.iter().enumerate() {
            if B8[s] != 0.0 {
                acc += B8[s] * ks[i];
            }
        }
        out[i] = x[i] + h * acc;
    }
    let mut err = 0.0f64;
    for i in 0..n {
        let e = (41.0 / 840.0) * (k[0][i] + k[10][i] - k[11][i] - k[12][i]);
        err = err.max((h * e).abs());
    }
    err
}

struct Stepper<'a> {
    rhs: &'a mut dyn FnMut(f64, &[f64], &mut [f64]),
    tol: f64,
    h: f64,
}

impl<'a> Stepper<'a> {
    fn new(rhs: &'a mut dyn FnMut(f64, &[f64], &mut [f64]), tol: f64, span: f64) -> Self {
        Stepper { rhs, tol, h: (span.abs() * 1e-3).max(1e-8) * span.signum() }
    }

    /// Advances from `(t, x)` by at most `|h_cap|`, adapting the step until
    /// the embedded error passes. Returns the accepted step actually taken.
    fn step(&mut self, t: f64, x: &mut [f64], h_cap: f64) -> Result<f64, NumericsError> {
        let mut out = vec![0.0; x.len()];
        loop {
            let mut h = self.h;
            if h.abs() > h_cap.abs() {
                h = h_cap;
            }
            if h.abs() < 1e-14 * (1.0 + t.abs()) {
                return Err(NumericsError::Numerical(format!(
                    "step size underflow at t = {t}"
                )));
            }
            let scale = self.tol * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
            let err = rkf78_step(self.rhs, t, x, h, &mut out);
            let ratio = err / scale;
            if ratio <= 1.0 {
                let grow = if ratio > 0.0 {
                    (0.9 * ratio.powf(-1.0 / 8.0)).clamp(0.2, 4.0)
                } else {
                    4.0
                };
                self.h = h * grow;
                x.copy_from_slice(&out);
                return Ok(h);
            }
            self.h = h * (0.9 * ratio.powf(-1.0 / 8.0)).clamp(0.1, 0.9);
        }
    }
}

/// Integrates `rhs` from `x0` over `[t0, t1]` (either direction), recording
/// every accepted step.
pub fn integrate_rhs(
    rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]),
    x0: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<FloatTrajectory, NumericsError> {
    if !(tol > 0.0) {
        return Err(NumericsError::Usage(format!("tol must be positive, got {tol}")));
    }
    let forward = t1 >= t0;
    let mut traj = FloatTrajectory::new(tol);
    let mut x = x0.to_vec();
    let mut t = t0;
    traj.times.push(t);
    traj.states.push(x.clone());
    let mut stepper = Stepper::new(rhs, tol, t1 - t0);
    let mut steps = 0usize;
    while (forward && t < t1) || (!forward && t > t1) {
        let h = stepper.step(t, &mut x, t1 - t)?;
        t += h;
        traj.times.push(t);
        traj.states.push(x.clone());
        steps += 1;
        if steps > 50_000_000 {
            return Err(NumericsError::Numerical("step budget exhausted".into()));
        }
    }
    if !forward {
        traj.times.reverse();
        traj.states.reverse();
    }
    Ok(traj)
}

/// Integrates a polynomial field (non-rigorous midpoint coefficients).
pub fn integrate(
    field: &PolynomialVectorField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<FloatTrajectory, NumericsError> {
    let ev = FieldEval::new(field);
    let mut rhs = move |_t: f64, x: &[f64], out: &mut [f64]| ev.eval(x, out);
    integrate_rhs(&mut rhs, x0, t0, t1, tol)
}

/// Integrates and returns the states exactly at the requested times, which
/// must be strictly increasing and start at or after `t0`.
pub fn integrate_sampled(
    rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]),
    x0: &[f64],
    t0: f64,
    times: &[f64],
    tol: f64,
) -> Result<Vec<Vec<f64>>, NumericsError> {
    let mut x = x0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(times.len());
    let last = *times.last().ok_or_else(|| NumericsError::Usage("no sample times".into()))?;
    let mut stepper = Stepper::new(rhs, tol, last - t0);
    for &ts in times {
        if ts < t {
            return Err(NumericsError::Usage(format!(
                "sample times must be nondecreasing from t0: {ts} < {t}"
            )));
        }
        while t < ts {
            let h = stepper.step(t, &mut x, ts - t)?;
            t += h;
        }
        out.push(x.clone());
    }
    Ok(out)
}

/// Result of a located event crossing.
#[derive(Debug, Clone)]
pub struct EventHit {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Flows forward from `(t0, x0)` until the scalar `event` crosses zero in
/// the requested direction (`+1` rising, `-1` falling, `0` either), up to
/// `t_max`. Returns `None` if no crossing occurs. The crossing time is
/// located to near machine precision by bisection on the step fraction.
pub fn flow_to_event(
    rhs: &mut dyn FnMut(f64, &[f64], &mut [f64]),
    x0: &[f64],
    t0: f64,
    t_max: f64,
    tol: f64,
    direction: i32,
    event: &dyn Fn(f64, &[f64]) -> f64,
    min_time: f64,
) -> Result<Option<EventHit>, NumericsError> {
    let mut x = x0.to_vec();
    let mut t = t0;
    let mut g_prev = event(t, &x);
    let mut stepper = Stepper::new(rhs, tol, t_max - t0);
    let crossing = |ga: f64, gb: f64| -> bool {
        match direction {
            1 => ga <= 0.0 && gb > 0.0,
            -1 => ga >= 0.0 && gb < 0.0,
            _ => (ga <= 0.0 && gb > 0.0) || (ga >= 0.0 && gb < 0.0),
        }
    };
    while t < t_max {
        let x_prev = x.clone();
        let t_prev = t;
        let h = stepper.step(t, &mut x, t_max - t)?;
        t += h;
        let g = event(t, &x);
        if t_prev >= min_time && crossing(g_prev, g) && g_prev != g {
            let mut lo = 0.0f64;
            let mut hi = h;
            let mut xm = vec![0.0; x.len()];
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                rkf78_step(rhs, t_prev, &x_prev, mid, &mut xm);
                let gm = event(t_prev + mid, &xm);
                if crossing(g_prev, gm) {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 * (1.0 + t_prev.abs()) {
                    break;
                }
            }
            rkf78_step(rhs, t_prev, &x_prev, hi, &mut xm);
            return Ok(Some(EventHit { t: t_prev + hi, state: xm }));
        }
        g_prev = g;
    }
    Ok(None)
}
