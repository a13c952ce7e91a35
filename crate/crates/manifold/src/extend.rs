//! Extension of an orbit-and-bundle jet to higher Taylor orders.
//!
//! Once the order-0 orbit and the order-1 bundle are fixed, every higher
//! grading block is determined by a linear system: the stage residual is
//! affine in the order-`alpha` unknowns because all nonlinear interactions
//! land at strictly lower orders. Extension therefore reuses the stage
//! Newton solver, which converges in a single step per order.
//!
//! The Taylor variable carries a free scale. Substituting `sigma / l` for
//! `sigma` multiplies the order-`alpha` coefficients by `l^alpha` and
//! leaves the conjugacy invariant, so the scale can be steered: the top
//! retained order is pushed into a prescribed magnitude window, balancing
//! the truncation error of the jet against the size of the coefficients
//! the tail bounds have to absorb.

use nalgebra::DVector;
use num_complex::Complex64;
use orbit::{newton_stage, seq_of, NewtonOptions, ScalarRow, SpectralProblem};

use crate::ManifoldError;

/// Scale targeting and solver tolerances for the extension.
#[derive(Clone, Copy, Debug)]
pub struct ExtendOptions {
    /// Acceptable window for the weighted norm of the top Taylor order.
    /// When the unscaled jet lands outside, the Taylor scale is adjusted
    /// toward the geometric center of the window.
    pub tip_lo: f64,
    pub tip_hi: f64,
    /// Stage solver tolerance.
    pub tol: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions { tip_lo: 1e-16, tip_hi: 1e-12, tol: 1e-12 }
    }
}

/// A jet extended to a fixed number of grading levels, together with the
/// Taylor scale applied on top of the input bundle normalization.
#[derive(Clone, Debug)]
pub struct ExtendedJet {
    pub problem: SpectralProblem,
    pub x: DVector<Complex64>,
    /// Factor `l` such that the returned order-`alpha` data equals
    /// `l^alpha` times the jet induced by the input bundle.
    pub scale: f64,
    /// Weighted norm of the top retained order after scaling.
    pub tip_norm: f64,
}

/// Multiply every order-`alpha` sequence block by `l^alpha`, leaving the
/// scalars untouched, and rebuild the problem so scalar rows on graded
/// blocks keep holding: a homogeneous row of degree `d` on order `alpha`
/// has its constant multiplied by `l^(d alpha)`.
pub fn rescale_taylor(
    p: &SpectralProblem,
    x: &mut DVector<Complex64>,
    l: f64,
) -> Result<SpectralProblem, ManifoldError> {
    if l <= 0.0 || !l.is_finite() {
        return Err(ManifoldError::Usage(format!("taylor scale {l} must be positive")));
    }
    let lay = p.layout();
    for alpha in 1..lay.orders {
        let factor = l.powi(alpha as i32);
        for i in 0..lay.n {
            for k in -(lay.m - 1)..=(lay.m - 1) {
                x[lay.idx_seq(alpha, i, k)] *= factor;
            }
        }
    }
    let mut rows = Vec::with_capacity(p.rows.len());
    for row in &p.rows {
        if row.order == 0 {
            rows.push(row.clone());
            continue;
        }
        let degrees: Vec<u32> = row.monos.iter().map(field::Monomial::total_degree).collect();
        let d = degrees.first().copied().unwrap_or(0);
        if degrees.iter().any(|&e| e != d) {
            return Err(ManifoldError::Usage(format!(
                "row '{}' is not homogeneous; its constant has no covariant rescaling",
                row.label
            )));
        }
        let factor = l.powi((d as i32) * (row.order as i32));
        rows.push(ScalarRow::new(
            &row.label,
            row.order,
            row.window,
            row.constant * factor,
            row.monos.clone(),
            p.n,
        ));
    }
    Ok(SpectralProblem::new(
        p.field.clone(),
        p.m,
        p.nu,
        p.orders,
        rows,
        p.unfolding.clone(),
    )?)
}

fn tip_norm(p: &SpectralProblem, x: &DVector<Complex64>) -> f64 {
    let lay = p.layout();
    (0..lay.n)
        .map(|i| seq_of(x, &lay, lay.orders - 1, i).norm(p.nu))
        .fold(0.0, f64::max)
}

/// Grow an orbit-and-bundle jet to `orders` grading levels. The input
/// problem must hold exactly the two base orders; the extension solves the
/// linear stages `2..orders` and then steers the Taylor scale into the
/// requested tip window.
pub fn extend_to_order(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    orders: usize,
    opts: ExtendOptions,
) -> Result<ExtendedJet, ManifoldError> {
    if p.orders != 2 {
        return Err(ManifoldError::Usage(format!(
            "extension starts from an orbit-and-bundle jet with 2 orders, got {}",
            p.orders
        )));
    }
    if orders < 3 {
        return Err(ManifoldError::Usage(format!(
            "extension target must exceed the base jet, got {orders} orders"
        )));
    }
    let mut pn = p.with_orders(orders, Vec::new())?;
    let lay2 = p.layout();
    let layn = pn.layout();
    let mut xn = DVector::from_element(layn.total(), Complex64::new(0.0, 0.0));
    for s in 0..layn.n_scalars() {
        xn[layn.idx_scalar(s)] = x[lay2.idx_scalar(s)];
    }
    for alpha in 0..2 {
        for i in 0..layn.n {
            for k in -(layn.m - 1)..=(layn.m - 1) {
                xn[layn.idx_seq(alpha, i, k)] = x[lay2.idx_seq(alpha, i, k)];
            }
        }
    }
    let nopts = NewtonOptions { tol: opts.tol, ..NewtonOptions::default() };
    for alpha in 2..orders {
        newton_stage(&pn, &mut xn, alpha, nopts)?;
    }
    let mut scale = 1.0;
    let tip = tip_norm(&pn, &xn);
    if tip > 0.0 && (tip < opts.tip_lo || tip > opts.tip_hi) {
        let target = (opts.tip_lo * opts.tip_hi).sqrt();
        let l = (target / tip).powf(1.0 / (orders as f64 - 1.0));
        pn = rescale_taylor(&pn, &mut xn, l)?;
        for alpha in 2..orders {
            newton_stage(&pn, &mut xn, alpha, nopts)?;
        }
        scale = l;
    }
    let tip_norm = tip_norm(&pn, &xn);
    Ok(ExtendedJet { problem: pn, x: xn, scale, tip_norm })
}
