//! Least-squares/FFT fitting of trajectory segments to Fourier and
//! Chebyshev coefficient arrays, with tail-decay diagnostics.

use crate::NumericsError;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Relative size of the last kept mode versus the largest mode, per
/// component maximum. Values near machine precision mean the truncation is
/// resolved; values above `TAIL_WARN` trigger `tail_warning`.
const TAIL_WARN: f64 = 1e-6;

/// One-sided Fourier coefficients of a real periodic signal:
/// `coeffs[i][k]` is `a_k` of component `i` for `k = 0..=m`, with
/// `a_{-k} = conj(a_k)` implied.
#[derive(Debug, Clone)]
pub struct FourierFit {
    pub omega: f64,
    pub coeffs: Vec<Vec<Complex64>>,
    pub tail_ratio: f64,
    pub tail_warning: bool,
}

/// Fits `m+1` one-sided Fourier modes to uniform samples over one period
/// (sample `j` at time `j*period/len`, endpoint excluded).
pub fn fit_fourier(
    states: &[Vec<f64>],
    period: f64,
    m: usize,
) -> Result<FourierFit, NumericsError> {
    let ns = states.len();
    if ns < 2 * m + 2 {
        return Err(NumericsError::Usage(format!(
            "{ns} samples cannot resolve {m} modes (need at least {})",
            2 * m + 2
        )));
    }
    if !(period > 0.0) {
        return Err(NumericsError::Usage(format!("period must be positive, got {period}")));
    }
    let dim = states[0].len();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(ns);
    let mut coeffs = Vec::with_capacity(dim);
    let mut tail_ratio = 0.0f64;
    for i in 0..dim {
        let mut buf: Vec<Complex64> =
            states.iter().map(|s| Complex64::new(s[i], 0.0)).collect();
        fft.process(&mut buf);
        let one_sided: Vec<Complex64> =
            (0..=m).map(|k| buf[k] / ns as f64).collect();
        let peak = one_sided.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            tail_ratio = tail_ratio.max(one_sided[m].norm() / peak);
        }
        coeffs.push(one_sided);
    }
    Ok(FourierFit {
        omega: 2.0 * std::f64::consts::PI / period,
        coeffs,
        tail_ratio,
        tail_warning: tail_ratio > TAIL_WARN,
    })
}

/// One-sided Chebyshev coefficients: `coeffs[i][k]` is `y_k` of component
/// `i` in the expansion `x(t) = y_0 + 2 * sum_{k>=1} y_k T_k(t)`.
#[derive(Debug, Clone)]
pub struct ChebyshevFit {
    pub coeffs: Vec<Vec<f64>>,
    pub tail_ratio: f64,
    pub tail_warning: bool,
}

/// Fits `k_modes` Chebyshev coefficients to a function on `[-1, 1]` by
/// discrete cosine sums over `n_samples` Gauss-Lobatto points. `n_samples`
/// should be several times `k_modes` to avoid aliasing.
pub fn fit_chebyshev(
    f: &dyn Fn(f64) -> Vec<f64>,
    k_modes: usize,
    n_samples: usize,
) -> Result<ChebyshevFit, NumericsError> {
    if k_modes == 0 {
        return Err(NumericsError::Usage("k_modes must be at least 1".into()));
    }
    if n_samples < 2 * k_modes {
        return Err(NumericsError::Usage(format!(
            "{n_samples} samples cannot resolve {k_modes} Chebyshev modes"
        )));
    }
    let ns = n_samples;
    let nodes: Vec<f64> = (0..=ns)
        .map(|j| (std::f64::consts::PI * j as f64 / ns as f64).cos())
        .collect();
    let samples: Vec<Vec<f64>> = nodes.iter().map(|&t| f(t)).collect();
    let dim = samples[0].len();
    let mut coeffs = vec![vec![0.0; k_modes]; dim];
    for i in 0..dim {
        for (k, ck) in coeffs[i].iter_mut().enumerate() {
            let mut acc = 0.5 * (samples[0][i] + if k % 2 == 0 { samples[ns][i] } else { -samples[ns][i] });
            for j in 1..ns {
                acc += samples[j][i] * (std::f64::consts::PI * (k * j) as f64 / ns as f64).cos();
            }
            *ck = acc / ns as f64;
        }
    }
    let mut tail_ratio = 0.0f64;
    for comp in &coeffs {
        let peak = comp.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if peak > 0.0 {
            tail_ratio = tail_ratio.max(comp[k_modes - 1].abs() / peak);
        }
    }
    Ok(ChebyshevFit { coeffs, tail_ratio, tail_warning: tail_ratio > TAIL_WARN })
}

/// Evaluates a one-sided Chebyshev expansion `y_0 + 2 sum y_k T_k(t)` by
/// Clenshaw recurrence.
pub fn eval_chebyshev(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + 2.0 * c;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}
