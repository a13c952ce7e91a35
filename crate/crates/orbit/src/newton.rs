//! Floating-point Newton stages on the truncated spectral maps.
//!
//! The full Jacobian is block lower triangular in the grading, so the
//! unknowns are solved one grading block at a time: the order-0 block is the
//! periodic-orbit problem, the order-1 block attaches the Floquet bundle,
//! and every higher block is a linear homological stage. Within a block the
//! complex unknowns are treated as holomorphic coordinates; after every
//! update the conjugate symmetry `a_{-k} = conj(a_k)` is restored exactly,
//! which is a projection onto the invariant subspace the real solution
//! lives in.

use field::{apply_field, eval_monomials};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::finseq::{FinSeq, FtStack};
use crate::problem::{Layout, SpectralProblem};
use crate::OrbitError;

/// Convergence and iteration control for one Newton stage.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 40, tol: 1e-13 }
    }
}

fn zc(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Extract the stored window of one sequence unknown.
pub fn seq_of(x: &DVector<Complex64>, lay: &Layout, alpha: usize, i: usize) -> FinSeq {
    let mut s = FinSeq::window(lay.m - 1);
    for k in -(lay.m - 1)..=(lay.m - 1) {
        s.set(k, x[lay.idx_seq(alpha, i, k)]);
    }
    s
}

/// Write a sequence back into the unknown vector, truncating to the window.
pub fn store_seq(x: &mut DVector<Complex64>, lay: &Layout, alpha: usize, i: usize, s: &FinSeq) {
    for k in -(lay.m - 1)..=(lay.m - 1) {
        x[lay.idx_seq(alpha, i, k)] = s.get(k);
    }
}

/// The graded stacks of all components, one per field variable.
pub fn stacks_of(x: &DVector<Complex64>, lay: &Layout) -> Vec<FtStack> {
    (0..lay.n)
        .map(|i| FtStack::new((0..lay.orders).map(|a| seq_of(x, lay, a, i)).collect()))
        .collect()
}

/// Windowed component sum `A_alpha^i = sum_{|k| < window} a_{alpha,k}^i`.
fn component_sum(x: &DVector<Complex64>, lay: &Layout, alpha: usize, i: usize, window: Option<i64>) -> Complex64 {
    let half = window.unwrap_or(lay.m).min(lay.m) - 1;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in -half..=half {
        acc += x[lay.idx_seq(alpha, i, k)];
    }
    acc
}

/// Unfolding cube `(a_0^c)^{*3}` at the current point.
fn unfolding_cube(x: &DVector<Complex64>, p: &SpectralProblem) -> Option<(usize, FinSeq, FinSeq)> {
    let u = p.unfolding.as_ref()?;
    let lay = p.layout();
    let a = seq_of(x, &lay, 0, u.cube_comp);
    let sq = field::CoeffAlgebra::mul(&a, &a).expect("finite convolution");
    let cube = field::CoeffAlgebra::mul(&sq, &a).expect("finite convolution");
    Some((u.cube_comp, sq, cube))
}

/// Residual of every row of the truncated map at the current point,
/// in layout order.
pub fn residual(p: &SpectralProblem, x: &DVector<Complex64>) -> Result<DVector<Complex64>, OrbitError> {
    let lay = p.layout();
    let stacks = stacks_of(x, &lay);
    let image = apply_field(&p.field, &stacks)?;
    let omega = x[lay.idx_omega()];
    let lambda = if lay.orders >= 2 { x[lay.idx_lambda()] } else { zc(0.0) };
    let betas = if lay.unfold { (x[lay.idx_beta(0)], x[lay.idx_beta(1)]) } else { (zc(0.0), zc(0.0)) };
    let cube = unfolding_cube(x, p);

    let mut r = DVector::from_element(lay.total(), zc(0.0));
    for alpha in 0..lay.orders {
        for i in 0..lay.n {
            let a = seq_of(x, &lay, alpha, i);
            let img = image[i].order(alpha);
            for k in -(lay.m - 1)..=(lay.m - 1) {
                let mut v = -Complex64::i() * omega * k as f64 * a.get(k)
                    - lambda * alpha as f64 * a.get(k)
                    + img.get(k);
                if alpha == 0 && lay.unfold {
                    v += betas.0 * a.get(k);
                    if let Some((c, _, cb)) = &cube {
                        if *c == i {
                            v += betas.1 * cb.get(k);
                        }
                    }
                }
                r[lay.idx_seq(alpha, i, k)] = v;
            }
        }
    }
    for (s, row) in p.rows.iter().enumerate() {
        let sums: Vec<Complex64> =
            (0..lay.n).map(|i| component_sum(x, &lay, row.order, i, row.window)).collect();
        let val = eval_monomials(&row.monos, &sums)?;
        r[lay.idx_scalar(s)] = val - zc(row.constant);
    }
    Ok(r)
}

/// Jacobian block of the rows and columns of grading block `alpha`, plus the
/// corresponding residual rows. Lower blocks are frozen, which is exact for
/// the triangular structure of the map.
pub fn block_system(
    p: &SpectralProblem,
    x: &DVector<Complex64>,
    alpha: usize,
) -> Result<(DMatrix<Complex64>, DVector<Complex64>), OrbitError> {
    let lay = p.layout();
    let full = residual(p, x)?;
    let offset = lay.block_start(alpha);
    let size = lay.block_size(alpha);
    let mut rhs = DVector::from_element(size, zc(0.0));
    for r in 0..size {
        rhs[r] = full[offset + r];
    }

    let stacks = stacks_of(x, &lay);
    let omega = x[lay.idx_omega()];
    let lambda = if lay.orders >= 2 { x[lay.idx_lambda()] } else { zc(0.0) };
    let beta1 = if lay.unfold { x[lay.idx_beta(0)] } else { zc(0.0) };
    let beta2 = if lay.unfold { x[lay.idx_beta(1)] } else { zc(0.0) };
    let cube = unfolding_cube(x, p);

    let mut jsym = Vec::with_capacity(lay.n);
    for i in 0..lay.n {
        let mut row = Vec::with_capacity(lay.n);
        for j in 0..lay.n {
            row.push(eval_monomials(p.jac_entry(i, j), &stacks)?);
        }
        jsym.push(row);
    }

    let mut mat = DMatrix::from_element(size, size, zc(0.0));
    let loc = |idx: usize| idx - offset;
    for i in 0..lay.n {
        for k in -(lay.m - 1)..=(lay.m - 1) {
            let row = loc(lay.idx_seq(alpha, i, k));
            for j in 0..lay.n {
                let sym = jsym[i][j].order(0);
                for l in -(lay.m - 1)..=(lay.m - 1) {
                    let mut v = sym.get(k - l);
                    if i == j && k == l {
                        v += -Complex64::i() * omega * k as f64 - lambda * alpha as f64;
                        if alpha == 0 && lay.unfold {
                            v += beta1;
                        }
                    }
                    if alpha == 0 {
                        if let Some((c, sq, _)) = &cube {
                            if *c == i && *c == j {
                                v += 3.0 * beta2 * sq.get(k - l);
                            }
                        }
                    }
                    if v != zc(0.0) {
                        mat[(row, loc(lay.idx_seq(alpha, j, l)))] += v;
                    }
                }
            }
            if alpha == 0 {
                let a = seq_of(x, &lay, 0, i);
                mat[(row, loc(lay.idx_omega()))] = -Complex64::i() * k as f64 * a.get(k);
                if lay.unfold {
                    mat[(row, loc(lay.idx_beta(0)))] = a.get(k);
                    if let Some((c, _, cb)) = &cube {
                        if *c == i {
                            mat[(row, loc(lay.idx_beta(1)))] = cb.get(k);
                        }
                    }
                }
            } else if alpha == 1 {
                let a = seq_of(x, &lay, 1, i);
                mat[(row, loc(lay.idx_lambda()))] = -a.get(k);
            }
        }
    }
    for (s, rowspec) in p.rows.iter().enumerate() {
        if lay.scalar_block(s) != alpha {
            continue;
        }
        let row = loc(lay.idx_scalar(s));
        let sums: Vec<Complex64> =
            (0..lay.n).map(|i| component_sum(x, &lay, rowspec.order, i, rowspec.window)).collect();
        let half = rowspec.window.unwrap_or(lay.m).min(lay.m) - 1;
        for j in 0..lay.n {
            let g = eval_monomials(rowspec.grad(j), &sums)?;
            if g == zc(0.0) {
                continue;
            }
            for l in -half..=half {
                mat[(row, loc(lay.idx_seq(rowspec.order, j, l)))] = g;
            }
        }
    }
    Ok((mat, rhs))
}

/// Restore conjugate symmetry on one grading block and realness of its
/// scalars.
pub fn symmetrize_block(x: &mut DVector<Complex64>, lay: &Layout, alpha: usize) {
    for i in 0..lay.n {
        let mut s = seq_of(x, lay, alpha, i);
        s.symmetrize();
        store_seq(x, lay, alpha, i, &s);
    }
    let base = lay.block_start(alpha);
    for s in 0..lay.scalars_in_block(alpha) {
        x[base + s] = zc(x[base + s].re);
    }
}

/// Newton iteration on one grading block. Returns the final residual
/// maximum modulus over the block rows.
pub fn newton_stage(
    p: &SpectralProblem,
    x: &mut DVector<Complex64>,
    alpha: usize,
    opts: NewtonOptions,
) -> Result<f64, OrbitError> {
    let lay = p.layout();
    let offset = lay.block_start(alpha);
    let size = lay.block_size(alpha);
    for _ in 0..opts.max_iter {
        let (mat, rhs) = block_system(p, x, alpha)?;
        let scale = 1.0 + (0..size).map(|r| x[offset + r].norm()).fold(0.0, f64::max);
        let last = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if last < opts.tol * scale {
            return Ok(last);
        }
        let lu = mat.lu();
        let delta = lu
            .solve(&rhs)
            .ok_or_else(|| OrbitError::Numerics(format!("singular stage-{alpha} Jacobian")))?;
        for r in 0..size {
            x[offset + r] -= delta[r];
        }
        symmetrize_block(x, &lay, alpha);
    }
    let (_, rhs) = block_system(p, x, alpha)?;
    let last = rhs.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let scale = 1.0 + (0..size).map(|r| x[offset + r].norm()).fold(0.0, f64::max);
    if last < opts.tol * scale {
        Ok(last)
    } else {
        Err(OrbitError::Numerics(format!(
            "stage-{alpha} Newton stalled at residual {last:.3e}"
        )))
    }
}

/// Run the Newton stages for every grading block in order.
pub fn solve_all_stages(
    p: &SpectralProblem,
    x: &mut DVector<Complex64>,
    opts: NewtonOptions,
) -> Result<f64, OrbitError> {
    let mut worst = 0.0f64;
    for alpha in 0..p.orders {
        worst = worst.max(newton_stage(p, x, alpha, opts)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{bundle_norm_row, phase_row};
    use field::systems::lorenz_classic;
    use rigor::RInterval;

    /// Constant unknowns at an equilibrium make every sequence row vanish
    /// term by term.
    #[test]
    fn equilibrium_constants_have_trivial_residual() {
        let rho1 = 27.0f64;
        let c = (8.0 / 3.0 * rho1).sqrt();
        let f = lorenz_classic();
        let m = 6i64;
        let p = SpectralProblem::new(
            f,
            m,
            1.0,
            1,
            vec![phase_row(&[1.0, 0.0, 0.0], c, m, 3)],
            None,
        )
        .unwrap();
        let lay = p.layout();
        let mut x = DVector::from_element(lay.total(), Complex64::new(0.0, 0.0));
        x[lay.idx_omega()] = Complex64::new(1.7, 0.0);
        for (i, v) in [c, c, rho1].iter().enumerate() {
            x[lay.idx_seq(0, i, 0)] = Complex64::new(*v, 0.0);
        }
        let r = residual(&p, &x).unwrap();
        let err = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "equilibrium residual {err:.3e}");
    }

    /// The block Jacobian matches a central finite difference of the
    /// residual in a handful of random directions.
    #[test]
    fn block_jacobian_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(91);
        let f = lorenz_classic();
        let m = 4i64;
        let p = SpectralProblem::new(
            f,
            m,
            1.0,
            2,
            vec![phase_row(&[0.3, -0.2, 1.0], 0.5, m, 3), bundle_norm_row(0.8, m, 3)],
            None,
        )
        .unwrap();
        let lay = p.layout();
        let mut x = DVector::from_element(lay.total(), Complex64::new(0.0, 0.0));
        for v in x.iter_mut() {
            *v = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for alpha in 0..2usize {
            let (mat, _) = block_system(&p, &x, alpha).unwrap();
            let offset = lay.block_start(alpha);
            let size = lay.block_size(alpha);
            for _ in 0..6 {
                let col = rng.gen_range(0..size);
                let h = 1e-6;
                let mut xp = x.clone();
                xp[offset + col] += Complex64::new(h, 0.0);
                let mut xm = x.clone();
                xm[offset + col] -= Complex64::new(h, 0.0);
                let rp = residual(&p, &xp).unwrap();
                let rm = residual(&p, &xm).unwrap();
                for row in 0..size {
                    let fd = (rp[offset + row] - rm[offset + row]) / (2.0 * h);
                    let an = mat[(row, col)];
                    assert!(
                        (fd - an).norm() < 1e-6 * (1.0 + an.norm()),
                        "alpha={alpha} entry ({row},{col}): fd={fd} analytic={an}"
                    );
                }
            }
        }
    }

    /// A planar cubic system with an attracting unit circle has exactly
    /// finite Fourier data, so Newton converges to it at machine precision
    /// from a perturbed seed.
    #[test]
    fn newton_recovers_the_attracting_circle_cycle() {
        use field::{Monomial, PolynomialVectorField};
        let mono = |c: f64, e: [u32; 2]| Monomial::new(RInterval::point(c), e.to_vec());
        let f = PolynomialVectorField::new(
            2,
            vec![
                vec![
                    mono(1.0, [1, 0]),
                    mono(-1.0, [0, 1]),
                    mono(-1.0, [3, 0]),
                    mono(-1.0, [1, 2]),
                ],
                vec![
                    mono(1.0, [1, 0]),
                    mono(1.0, [0, 1]),
                    mono(-1.0, [2, 1]),
                    mono(-1.0, [0, 3]),
                ],
            ],
            Vec::new(),
        )
        .unwrap();
        let m = 4i64;
        let p = SpectralProblem::new(f, m, 1.0, 1, vec![phase_row(&[0.0, 1.0], 0.0, m, 2)], None).unwrap();
        let lay = p.layout();
        let mut x = DVector::from_element(lay.total(), Complex64::new(0.0, 0.0));
        x[lay.idx_omega()] = Complex64::new(0.93, 0.0);
        x[lay.idx_seq(0, 0, 1)] = Complex64::new(0.47, 0.02);
        x[lay.idx_seq(0, 0, -1)] = Complex64::new(0.47, -0.02);
        x[lay.idx_seq(0, 1, 1)] = Complex64::new(0.01, -0.48);
        x[lay.idx_seq(0, 1, -1)] = Complex64::new(0.01, 0.48);
        let res = newton_stage(&p, &mut x, 0, NewtonOptions::default()).unwrap();
        assert!(res < 1e-13);
        assert!((x[lay.idx_omega()].re - 1.0).abs() < 1e-11, "omega -> 1");
        let a = x[lay.idx_seq(0, 0, 1)];
        assert!((a.re - 0.5).abs() < 1e-11 && a.im.abs() < 1e-11);
        assert!(x[lay.idx_seq(0, 0, 2)].norm() < 1e-12);
        assert!(x[lay.idx_seq(0, 1, 3)].norm() < 1e-12);
    }
}
