//! Problem descriptions for the spectral zero-finding maps.
//!
//! A spectral problem collects a polynomial vector field together with the
//! truncation data and the scalar balance rows that make the periodic-orbit
//! map (and its Taylor-graded extensions) a square zero-finding problem for
//! the unknowns `(omega, [lambda,] [beta_1, beta_2,] a_0, ..., a_{N-1})`.
//!
//! The sequence rows of the map at grading order `alpha` read
//!
//! ```text
//! F_alpha^i_k = -i omega k a_{alpha,k}^i - alpha lambda a_{alpha,k}^i
//!               + (f(P))^i_{alpha,k} + [alpha = 0] unfolding terms
//! ```
//!
//! where `P = sum_alpha a_alpha sigma^alpha` and the unfolding terms are
//! `beta_1 a_0^i` on every component plus `beta_2 (a_0^c)^{*3}` on the cube
//! component `c`. Scalar rows are polynomials in the component sums
//! `A_alpha^i = sum_k a_{alpha,k}^i` minus a pinned constant.

use field::{jacobian, Monomial, PolynomialVectorField};
use rigor::RInterval;

use crate::OrbitError;

/// A scalar balance row: `poly(A_order^1, ..., A_order^n) - constant`,
/// where `A_order^i` sums the stored modes of component `i` at the given
/// grading order, over `|k| < window` when a window is present and over all
/// modes otherwise.
#[derive(Clone, Debug)]
pub struct ScalarRow {
    pub label: String,
    pub order: usize,
    pub window: Option<i64>,
    pub constant: f64,
    pub monos: Vec<Monomial>,
    grad: Vec<Vec<Monomial>>,
}

impl ScalarRow {
    pub fn new(
        label: &str,
        order: usize,
        window: Option<i64>,
        constant: f64,
        monos: Vec<Monomial>,
        nvars: usize,
    ) -> Self {
        for m in &monos {
            assert_eq!(m.exps.len(), nvars, "scalar row arity mismatch");
        }
        let grad = (0..nvars).map(|j| diff_monomials(&monos, j)).collect();
        ScalarRow {
            label: label.to_string(),
            order,
            window,
            constant,
            monos,
            grad,
        }
    }

    /// Monomials of `d poly / d A^j`.
    pub fn grad(&self, j: usize) -> &[Monomial] {
        &self.grad[j]
    }
}

/// Partial derivative of a monomial list with respect to variable `j`.
pub fn diff_monomials(monos: &[Monomial], j: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    for m in monos {
        let e = m.exps[j];
        if e == 0 {
            continue;
        }
        let mut exps = m.exps.clone();
        exps[j] = e - 1;
        out.push(Monomial::new(m.coef.scale(e as f64), exps));
    }
    out
}

/// Unfolding terms appended to the order-0 sequence rows: `beta_1 a_0^i` on
/// every component and `beta_2 (a_0^c)^{*3}` on component `c`.
#[derive(Clone, Debug)]
pub struct Unfolding {
    pub cube_comp: usize,
}

/// Square spectral zero-finding problem on `orders` grading levels with
/// modes `|k| < m`.
#[derive(Clone, Debug)]
pub struct SpectralProblem {
    pub field: PolynomialVectorField,
    pub n: usize,
    pub m: i64,
    pub nu: f64,
    pub orders: usize,
    pub rows: Vec<ScalarRow>,
    pub unfolding: Option<Unfolding>,
    jac: Vec<Vec<Vec<Monomial>>>,
}

/// Index layout of the flattened unknown vector. Scalars come first inside
/// their grading block: block 0 holds `omega` (and `beta_1, beta_2` when
/// unfolding is present) followed by the order-0 sequences; block 1 holds
/// `lambda` followed by the order-1 sequences; higher blocks hold their
/// sequences only. Scalar rows occupy the same positions as the scalar
/// columns, so the full Jacobian is block lower triangular in the grading.
#[derive(Clone, Copy, Debug)]
pub struct Layout {
    pub n: usize,
    pub m: i64,
    pub orders: usize,
    pub unfold: bool,
}

impl Layout {
    pub fn width(&self) -> usize {
        (2 * self.m - 1) as usize
    }

    pub fn scalars_in_block(&self, alpha: usize) -> usize {
        match alpha {
            0 => 1 + if self.unfold { 2 } else { 0 },
            1 => 1,
            _ => 0,
        }
    }

    pub fn n_scalars(&self) -> usize {
        (0..self.orders).map(|a| self.scalars_in_block(a)).sum()
    }

    pub fn block_size(&self, alpha: usize) -> usize {
        self.scalars_in_block(alpha) + self.n * self.width()
    }

    pub fn block_start(&self, alpha: usize) -> usize {
        (0..alpha).map(|a| self.block_size(a)).sum()
    }

    pub fn total(&self) -> usize {
        self.block_start(self.orders - 1) + self.block_size(self.orders - 1)
    }

    pub fn idx_omega(&self) -> usize {
        self.block_start(0)
    }

    pub fn idx_beta(&self, which: usize) -> usize {
        assert!(self.unfold && which < 2);
        self.block_start(0) + 1 + which
    }

    pub fn idx_lambda(&self) -> usize {
        assert!(self.orders >= 2);
        self.block_start(1)
    }

    pub fn idx_seq(&self, alpha: usize, i: usize, k: i64) -> usize {
        debug_assert!(alpha < self.orders && i < self.n && k.abs() < self.m);
        self.block_start(alpha)
            + self.scalars_in_block(alpha)
            + i * self.width()
            + (k + self.m - 1) as usize
    }

    /// Global index of the `s`-th scalar row/column (rows mirror columns).
    pub fn idx_scalar(&self, s: usize) -> usize {
        let s0 = self.scalars_in_block(0);
        if s < s0 {
            self.block_start(0) + s
        } else {
            self.block_start(1) + (s - s0)
        }
    }

    /// Grading block a scalar slot belongs to.
    pub fn scalar_block(&self, s: usize) -> usize {
        if s < self.scalars_in_block(0) {
            0
        } else {
            1
        }
    }
}

impl SpectralProblem {
    pub fn new(
        field: PolynomialVectorField,
        m: i64,
        nu: f64,
        orders: usize,
        rows: Vec<ScalarRow>,
        unfolding: Option<Unfolding>,
    ) -> Result<Self, OrbitError> {
        if m < 2 {
            return Err(OrbitError::Usage("need at least two modes".into()));
        }
        if !(nu >= 1.0 && nu.is_finite()) {
            return Err(OrbitError::Usage("weight must satisfy nu >= 1".into()));
        }
        if orders == 0 {
            return Err(OrbitError::Usage("need at least one grading order".into()));
        }
        let n = field.dim();
        let expected = 1
            + if orders >= 2 { 1 } else { 0 }
            + if unfolding.is_some() { 2 } else { 0 };
        if rows.len() != expected {
            return Err(OrbitError::Usage(format!(
                "{} scalar rows for {} scalar unknowns",
                rows.len(),
                expected
            )));
        }
        let s0 = 1 + if unfolding.is_some() { 2 } else { 0 };
        for (s, row) in rows.iter().enumerate() {
            if row.order >= orders {
                return Err(OrbitError::Usage(format!(
                    "scalar row '{}' references grading order {} of {}",
                    row.label, row.order, orders
                )));
            }
            let expected_order = if s < s0 { 0 } else { 1 };
            if row.order != expected_order {
                return Err(OrbitError::Usage(format!(
                    "scalar row '{}' in slot {s} must pin grading order {expected_order}",
                    row.label
                )));
            }
        }
        if let Some(u) = &unfolding {
            if u.cube_comp >= n {
                return Err(OrbitError::Usage("cube component out of range".into()));
            }
        }
        let jac = jacobian(&field);
        Ok(SpectralProblem { field, n, m, nu, orders, rows, unfolding, jac })
    }

    pub fn layout(&self) -> Layout {
        Layout {
            n: self.n,
            m: self.m,
            orders: self.orders,
            unfold: self.unfolding.is_some(),
        }
    }

    /// Monomials of the field Jacobian entry `d f^i / d x^j`.
    pub fn jac_entry(&self, i: usize, j: usize) -> &[Monomial] {
        &self.jac[i][j]
    }

    /// Number of scalar unknowns (equals the number of scalar rows).
    pub fn n_scalars(&self) -> usize {
        self.rows.len()
    }

    /// A copy of this problem truncated or extended to a new grading depth,
    /// keeping the order-0 rows and dropping or demanding the order-1 ones.
    pub fn with_orders(&self, orders: usize, extra_rows: Vec<ScalarRow>) -> Result<Self, OrbitError> {
        let mut rows: Vec<ScalarRow> =
            self.rows.iter().filter(|r| r.order < orders.min(2)).cloned().collect();
        rows.extend(extra_rows);
        SpectralProblem::new(
            self.field.clone(),
            self.m,
            self.nu,
            orders,
            rows,
            self.unfolding.clone(),
        )
    }
}

/// Phase row `sum_i normal_i A_0^i - value` pinning the angular origin of
/// the order-0 sequences to the plane through the anchor with the given
/// normal.
pub fn phase_row(normal: &[f64], value: f64, window: i64, n: usize) -> ScalarRow {
    let monos = normal
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| {
            let mut exps = vec![0u32; n];
            exps[i] = 1;
            Monomial::new(RInterval::point(*c), exps)
        })
        .collect();
    ScalarRow::new("phase", 0, Some(window), value, monos, n)
}

/// Bundle amplitude row `sum_i (A_1^i)^2 - l`.
pub fn bundle_norm_row(l: f64, window: i64, n: usize) -> ScalarRow {
    let monos = (0..n)
        .map(|i| {
            let mut exps = vec![0u32; n];
            exps[i] = 2;
            Monomial::new(RInterval::ONE, exps)
        })
        .collect();
    ScalarRow::new("amplitude", 1, Some(window), l, monos, n)
}

/// Radial constraint row `(A_0^5)^2 ((A_0^1)^2 + (A_0^2)^2) - 1` for the
/// five-component embedded system, pinning the initial point to the
/// invariant set where the fifth variable inverts the planar radius.
pub fn radial_constraint_row(n: usize) -> ScalarRow {
    assert_eq!(n, 5);
    let mono = |exps: [u32; 5]| Monomial::new(RInterval::ONE, exps.to_vec());
    let monos = vec![mono([2, 0, 0, 0, 2]), mono([0, 2, 0, 0, 2])];
    ScalarRow::new("radial-constraint", 0, None, 1.0, monos, n)
}

/// First-integral row `lambda2 (A^1)^2 + lambda1 (A^2)^2 - (A^3)^2 - (A^4)^2
/// + 2 A^5 - c` for the embedded system.
pub fn energy_row(lambda1: RInterval, lambda2: RInterval, c: f64, n: usize) -> ScalarRow {
    assert_eq!(n, 5);
    let mono = |coef: RInterval, exps: [u32; 5]| Monomial::new(coef, exps.to_vec());
    let monos = vec![
        mono(lambda2, [2, 0, 0, 0, 0]),
        mono(lambda1, [0, 2, 0, 0, 0]),
        mono(RInterval::point(-1.0), [0, 0, 2, 0, 0]),
        mono(RInterval::point(-1.0), [0, 0, 0, 2, 0]),
        mono(RInterval::point(2.0), [0, 0, 0, 0, 1]),
    ];
    ScalarRow::new("first-integral", 0, None, c, monos, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use field::systems::lorenz_classic;

    #[test]
    fn layout_indices_tile_the_unknown_vector_exactly() {
        for (orders, unfold) in [(1usize, false), (2, false), (1, true), (4, true)] {
            let lay = Layout { n: 3, m: 5, orders, unfold };
            let mut seen = vec![false; lay.total()];
            let mut mark = |idx: usize| {
                assert!(!seen[idx], "index {idx} assigned twice");
                seen[idx] = true;
            };
            mark(lay.idx_omega());
            if unfold {
                mark(lay.idx_beta(0));
                mark(lay.idx_beta(1));
            }
            if orders >= 2 {
                mark(lay.idx_lambda());
            }
            for alpha in 0..orders {
                for i in 0..3 {
                    for k in -4..=4 {
                        mark(lay.idx_seq(alpha, i, k));
                    }
                }
            }
            assert!(seen.iter().all(|b| *b), "layout left gaps");
            for s in 0..lay.n_scalars() {
                assert!(seen[lay.idx_scalar(s)]);
            }
        }
    }

    #[test]
    fn scalar_columns_stay_inside_their_triangular_blocks() {
        let lay = Layout { n: 5, m: 4, orders: 3, unfold: true };
        assert_eq!(lay.scalar_block(0), 0);
        assert_eq!(lay.scalar_block(1), 0);
        assert_eq!(lay.scalar_block(2), 0);
        assert_eq!(lay.scalar_block(3), 1);
        assert!(lay.idx_lambda() >= lay.block_start(1));
        assert!(lay.idx_lambda() < lay.block_start(2));
        assert!(lay.idx_beta(1) < lay.block_start(0) + lay.block_size(0));
    }

    #[test]
    fn row_gradients_differentiate_the_monomials() {
        let row = energy_row(RInterval::point(0.5), RInterval::point(3.0), 4.0, 5);
        let g0 = row.grad(0);
        assert_eq!(g0.len(), 1);
        assert!(g0[0].coef.contains(6.0));
        assert_eq!(g0[0].exps, vec![1, 0, 0, 0, 0]);
        let g4 = row.grad(4);
        assert_eq!(g4.len(), 1);
        assert!(g4[0].coef.contains(2.0));
        assert_eq!(g4[0].exps, vec![0, 0, 0, 0, 0]);
    }

    #[test]
    fn problem_rejects_mismatched_scalar_rows() {
        let f = lorenz_classic();
        let err = SpectralProblem::new(f.clone(), 10, 1.01, 2, vec![phase_row(&[1.0, 0.0, 0.0], 0.0, 10, 3)], None);
        assert!(err.is_err());
        let ok = SpectralProblem::new(
            f,
            10,
            1.01,
            2,
            vec![phase_row(&[1.0, 0.0, 0.0], 0.0, 10, 3), bundle_norm_row(1.0, 10, 3)],
            None,
        );
        assert!(ok.is_ok());
    }
}
