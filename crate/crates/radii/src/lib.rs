//! Radii-polynomial validation: turn residual and derivative bounds into a
//! certified contraction radius.
//!
//! A fixed-point operator `T` on a product of Banach spaces is a contraction
//! on the ball of radius `r` around a numerical candidate whenever, for every
//! component `i`,
//!
//! ```text
//! p_i(r) = Y_i + Z_i(r) - r < 0,
//! ```
//!
//! where `Y_i` bounds the defect `|T(x̄) - x̄|_i` and `Z_i(r)` bounds
//! `sup_{|h| <= r} |DT(x̄ + h)|_i · r`. A verified negative sign of every
//! `p_i` at some `r` proves existence and uniqueness of a true solution in
//! the ball of that radius. This crate owns the polynomial bookkeeping, the
//! rigorous sign evaluation, and the radius search; each caller assembles its
//! own `Y_i` and `Z_i` terms from problem-specific operator estimates.

use rigor::RInterval;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadiiError {
    #[error("usage error: {0}")]
    Usage(String),
}

/// One term of a derivative bound `Z_i(r)`: `coeff * r^degree` with
/// `degree >= 1`. The label survives into failure diagnostics so a failed
/// validation names the estimate that dominated.
#[derive(Debug, Clone, Serialize)]
pub struct ZTerm {
    pub label: String,
    pub degree: u32,
    pub coeff: RInterval,
}

impl ZTerm {
    pub fn new(label: &str, degree: u32, coeff: RInterval) -> Self {
        assert!(degree >= 1, "Z terms carry at least one factor of r");
        assert!(coeff.lo >= 0.0, "Z coefficients are nonnegative bounds");
        ZTerm { label: label.to_string(), degree, coeff }
    }
}

/// The bounds for one component of the fixed-point problem.
#[derive(Debug, Clone, Serialize)]
pub struct RadiiComponent {
    pub name: String,
    pub y: RInterval,
    pub z_terms: Vec<ZTerm>,
}

impl RadiiComponent {
    pub fn new(name: &str, y: RInterval, z_terms: Vec<ZTerm>) -> Self {
        assert!(y.lo >= 0.0, "Y is a nonnegative bound");
        RadiiComponent { name: name.to_string(), y, z_terms }
    }
}

/// A complete radii-polynomial problem: per-component bounds plus the largest
/// radius `r_star` on which the `Z` estimates are valid.
#[derive(Debug, Clone, Serialize)]
pub struct RadiiProblem {
    pub components: Vec<RadiiComponent>,
    pub r_star: f64,
}

impl RadiiProblem {
    pub fn new(components: Vec<RadiiComponent>, r_star: f64) -> Result<Self, RadiiError> {
        if components.is_empty() {
            return Err(RadiiError::Usage("no components".into()));
        }
        if !(r_star > 0.0) || !r_star.is_finite() {
            return Err(RadiiError::Usage(format!("r_star must be positive and finite, got {r_star}")));
        }
        Ok(RadiiProblem { components, r_star })
    }
}

/// Dense interval polynomial `p(r) = c_0 + c_1 r + ...`, used for the
/// assembled radii polynomials.
#[derive(Debug, Clone, Serialize)]
pub struct IntervalPoly {
    pub coeffs: Vec<RInterval>,
}

impl IntervalPoly {
    /// Evaluates by Horner's scheme in interval arithmetic at a point radius.
    pub fn eval(&self, r: RInterval) -> RInterval {
        let mut acc = RInterval::ZERO;
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(r).add(*c);
        }
        acc
    }
}

/// Assembles `p_i(r) = Y_i + Z_i(r) - r` for every component, merging the
/// `-r` into the linear coefficient.
pub fn radii_polynomials(prob: &RadiiProblem) -> Vec<IntervalPoly> {
    prob.components
        .iter()
        .map(|comp| {
            let max_deg = comp.z_terms.iter().map(|t| t.degree).max().unwrap_or(1).max(1);
            let mut coeffs = vec![RInterval::ZERO; max_deg as usize + 1];
            coeffs[0] = comp.y;
            coeffs[1] = coeffs[1].sub(RInterval::ONE);
            for term in &comp.z_terms {
                coeffs[term.degree as usize] = coeffs[term.degree as usize].add(term.coeff);
            }
            IntervalPoly { coeffs }
        })
        .collect()
}

/// Outcome of the radius search. `success` implies that every radii
/// polynomial was verified strictly negative at `r_min` in interval
/// arithmetic, with `0 < r_min < r_star`, so the certified ball of radius
/// `r_min` contains exactly one true solution.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationVerdict {
    pub success: bool,
    /// Smallest verified radius, when successful.
    pub r_min: Option<f64>,
    /// An enclosure `(lo, hi)` of radii at which every polynomial was
    /// verified negative; the true admissible set contains it.
    pub r_interval: Option<(f64, f64)>,
    /// Values `p_i(r_min)` at the certified radius, when successful.
    pub values_at_r_min: Vec<RInterval>,
    /// Human-readable explanation of a failure, empty on success.
    pub diagnostics: String,
}

const GRID_POINTS: usize = 64;
const GRID_FLOOR: f64 = 1e-14;
const BISECT_STEPS: usize = 60;

fn all_negative(polys: &[IntervalPoly], r: f64) -> bool {
    let rr = RInterval::point(r);
    polys.iter().all(|p| p.eval(rr).hi < 0.0)
}

/// Searches for the smallest verified radius on a geometric grid over
/// `[1e-14, r_star]`, then tightens the smallest success by bisection against
/// the largest failing candidate below it. Every sign claim is re-verified in
/// interval arithmetic; an enclosure that straddles zero counts as a failure,
/// never as a success.
pub fn find_radius(prob: &RadiiProblem) -> ValidationVerdict {
    let polys = radii_polynomials(prob);
    let lo = GRID_FLOOR.min(prob.r_star / 2.0);
    let ratio = (prob.r_star / lo).powf(1.0 / (GRID_POINTS as f64 - 1.0));
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| (lo * ratio.powi(i as i32)).min(prob.r_star))
        .collect();
    let ok: Vec<bool> = grid.iter().map(|&r| all_negative(&polys, r)).collect();

    let Some(first_ok) = ok.iter().position(|&b| b) else {
        return failure_verdict(prob, &polys, &grid);
    };

    let mut hi = grid[first_ok];
    let mut below = if first_ok == 0 { 0.0 } else { grid[first_ok - 1] };
    for _ in 0..BISECT_STEPS {
        let mid = 0.5 * (below + hi);
        if mid <= below || mid >= hi {
            break;
        }
        if all_negative(&polys, mid) {
            hi = mid;
        } else {
            below = mid;
        }
    }
    let r_min = hi;

    let last_ok = ok.iter().rposition(|&b| b).unwrap();
    let upper = grid[last_ok];
    let values = polys.iter().map(|p| p.eval(RInterval::point(r_min))).collect();
    ValidationVerdict {
        success: true,
        r_min: Some(r_min),
        r_interval: Some((r_min, upper)),
        values_at_r_min: values,
        diagnostics: String::new(),
    }
}

/// Builds the failure report: finds the grid radius where the worst violation
/// is smallest, names the component whose polynomial is most positive there,
/// and names the bound (`Y` or a labelled `Z` term) contributing most to it.
fn failure_verdict(prob: &RadiiProblem, polys: &[IntervalPoly], grid: &[f64]) -> ValidationVerdict {
    let mut best_r = grid[0];
    let mut best_worst = f64::INFINITY;
    let mut best_comp = 0;
    for &r in grid {
        let rr = RInterval::point(r);
        let (comp, worst) = polys
            .iter()
            .map(|p| p.eval(rr).hi)
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if worst < best_worst {
            best_worst = worst;
            best_r = r;
            best_comp = comp;
        }
    }
    let comp = &prob.components[best_comp];
    let rr = RInterval::point(best_r);
    let mut dom_label = "Y".to_string();
    let mut dom_value = comp.y.hi;
    for term in &comp.z_terms {
        let contrib = term.coeff.mul(rr.powi(term.degree)).hi;
        if contrib > dom_value {
            dom_value = contrib;
            dom_label = term.label.clone();
        }
    }
    let diagnostics = format!(
        "no radius in [{:.3e}, {:.3e}] verifies: component '{}' has p({:.6e}) >= {:.6e}, dominated by {} ({:.6e})",
        grid[0], prob.r_star, comp.name, best_r, best_worst, dom_label, dom_value
    );
    ValidationVerdict {
        success: false,
        r_min: None,
        r_interval: None,
        values_at_r_min: Vec::new(),
        diagnostics,
    }
}
