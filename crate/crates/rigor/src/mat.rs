//! Dense matrices and rigorous enclosure products.
//!
//! Interval matrix products use the midpoint-radius representation: the
//! midpoint product runs at native floating-point speed and the radius part
//! absorbs both the operand radii and an a-priori bound on the accumulated
//! rounding error of the midpoint product. This is what makes the large
//! defect products of the validation stages affordable.

use crate::complex::CInterval;
use crate::interval::RInterval;
use num_complex::Complex64;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_elem(nrows: usize, ncols: usize, v: T) -> Self {
        Mat { nrows, ncols, data: vec![v; nrows * ncols] }
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.ncols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.ncols + j]
    }
}

/// Plain `C = A * B` on raw f64 planes, accumulation in row-major ikj order.
pub fn mm(ni: usize, nk: usize, nj: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), ni * nk);
    assert_eq!(b.len(), nk * nj);
    let mut c = vec![0.0; ni * nj];
    for i in 0..ni {
        let crow = &mut c[i * nj..(i + 1) * nj];
        for k in 0..nk {
            let aik = a[i * nk + k];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * nj..(k + 1) * nj];
            for (cj, bj) in crow.iter_mut().zip(brow) {
                *cj += aik * bj;
            }
        }
    }
    c
}

/// Numerical complex matrix product (not an enclosure).
pub fn cmm64(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Mat<Complex64> {
    let (ni, nk, nj) = (a.nrows, a.ncols, b.ncols);
    assert_eq!(nk, b.nrows);
    let (are, aim) = split_c64(&a.data);
    let (bre, bim) = split_c64(&b.data);
    let rr = mm(ni, nk, nj, &are, &bre);
    let ii = mm(ni, nk, nj, &aim, &bim);
    let ri = mm(ni, nk, nj, &are, &bim);
    let ir = mm(ni, nk, nj, &aim, &bre);
    let data = (0..ni * nj).map(|t| Complex64::new(rr[t] - ii[t], ri[t] + ir[t])).collect();
    Mat { nrows: ni, ncols: nj, data }
}

fn split_c64(v: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

/// Upper bound on the classical rounding-error factor n*u/(1-n*u).
fn gamma_up(n: usize) -> f64 {
    let u = 0.5 * f64::EPSILON;
    let nu = (n as f64) * u;
    assert!(nu < 0.25, "matrix dimension too large for the rounding model");
    (nu / (1.0 - nu)).next_up().next_up()
}

struct RadiusModel {
    c1: f64,
    c2: f64,
}

/// Constants for the radius combination: with `g` the floating sum of the
/// products of midpoint magnitudes and `s` the floating sum of the cross
/// terms, the true radius is at most `s*c1 + g*c2` up to the final rounded
/// combination (compensated by outward steps at the call site).
fn radius_model(nk: usize, complex: bool) -> RadiusModel {
    let k = gamma_up(4 * nk + 16);
    let c1 = (1.0 + 4.0 * k).next_up();
    let scale = if complex { 3.0 } else { 1.0 };
    let c2 = (scale * k * c1).next_up().next_up();
    RadiusModel { c1, c2 }
}

fn combine_radius(model: &RadiusModel, e1: f64, e2: f64, g: f64) -> f64 {
    ((e1 + e2).next_up() * model.c1).next_up() + (model.c2 * g).next_up()
}

/// Enclosure of the product of two real interval matrices.
pub fn rinterval_matmul(a: &Mat<RInterval>, b: &Mat<RInterval>) -> Mat<RInterval> {
    let (ni, nk, nj) = (a.nrows, a.ncols, b.ncols);
    assert_eq!(nk, b.nrows);
    let (am, ar) = midrad_r(&a.data);
    let (bm, br) = midrad_r(&b.data);
    let aa: Vec<f64> = am.iter().map(|x| x.abs()).collect();
    let ab: Vec<f64> = bm.iter().map(|x| x.abs()).collect();
    let bb: Vec<f64> = ab.iter().zip(&br).map(|(x, r)| (x + r).next_up()).collect();
    let cm = mm(ni, nk, nj, &am, &bm);
    let e1 = mm(ni, nk, nj, &aa, &br);
    let e2 = mm(ni, nk, nj, &ar, &bb);
    let g = mm(ni, nk, nj, &aa, &ab);
    let model = radius_model(nk, false);
    let data = (0..ni * nj)
        .map(|t| {
            let rad = combine_radius(&model, e1[t], e2[t], g[t]).next_up();
            RInterval { lo: (cm[t] - rad).next_down(), hi: (cm[t] + rad).next_up() }
        })
        .collect();
    Mat { nrows: ni, ncols: nj, data }
}

fn midrad_r(v: &[RInterval]) -> (Vec<f64>, Vec<f64>) {
    let mut mid = Vec::with_capacity(v.len());
    let mut rad = Vec::with_capacity(v.len());
    for x in v {
        let m = x.mid();
        mid.push(m);
        rad.push((x.hi - m).next_up().max((m - x.lo).next_up()).max(0.0));
    }
    (mid, rad)
}

/// Enclosure of the product of two complex interval matrices.
pub fn cinterval_matmul(a: &Mat<CInterval>, b: &Mat<CInterval>) -> Mat<CInterval> {
    let (ni, nk, nj) = (a.nrows, a.ncols, b.ncols);
    assert_eq!(nk, b.nrows);
    let (amre, amim, aa, ar) = midrad_c(&a.data);
    let (bmre, bmim, ab, br) = midrad_c(&b.data);
    let bb: Vec<f64> = ab.iter().zip(&br).map(|(x, r)| (x + r).next_up()).collect();
    let rr = mm(ni, nk, nj, &amre, &bmre);
    let ii = mm(ni, nk, nj, &amim, &bmim);
    let ri = mm(ni, nk, nj, &amre, &bmim);
    let ir = mm(ni, nk, nj, &amim, &bmre);
    let e1 = mm(ni, nk, nj, &aa, &br);
    let e2 = mm(ni, nk, nj, &ar, &bb);
    let g = mm(ni, nk, nj, &aa, &ab);
    let model = radius_model(nk, true);
    let data = (0..ni * nj)
        .map(|t| {
            let rad = combine_radius(&model, e1[t], e2[t], g[t]).next_up().next_up();
            let cre = rr[t] - ii[t];
            let cim = ri[t] + ir[t];
            CInterval {
                re: RInterval { lo: (cre - rad).next_down(), hi: (cre + rad).next_up() },
                im: RInterval { lo: (cim - rad).next_down(), hi: (cim + rad).next_up() },
            }
        })
        .collect();
    Mat { nrows: ni, ncols: nj, data }
}

fn midrad_c(v: &[CInterval]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut mre = Vec::with_capacity(v.len());
    let mut mim = Vec::with_capacity(v.len());
    let mut mabs = Vec::with_capacity(v.len());
    let mut rad = Vec::with_capacity(v.len());
    for z in v {
        let (r, i) = (z.re.mid(), z.im.mid());
        mre.push(r);
        mim.push(i);
        mabs.push(((r * r).next_up() + (i * i).next_up()).next_up().sqrt().next_up());
        let dr = (z.re.hi - r).next_up().max((r - z.re.lo).next_up()).max(0.0);
        let di = (z.im.hi - i).next_up().max((i - z.im.lo).next_up()).max(0.0);
        rad.push(((dr * dr).next_up() + (di * di).next_up()).next_up().sqrt().next_up());
    }
    (mre, mim, mabs, rad)
}

/// Exact-order interval matrix-vector product (complex).
pub fn cmatvec(a: &Mat<CInterval>, x: &[CInterval]) -> Vec<CInterval> {
    assert_eq!(a.ncols, x.len());
    (0..a.nrows)
        .map(|i| {
            let mut acc = CInterval::ZERO;
            for (aij, xj) in a.row(i).iter().zip(x) {
                acc = acc.add(aij.mul(*xj));
            }
            acc
        })
        .collect()
}

/// Exact-order interval matrix-vector product (real).
pub fn rmatvec(a: &Mat<RInterval>, x: &[RInterval]) -> Vec<RInterval> {
    assert_eq!(a.ncols, x.len());
    (0..a.nrows)
        .map(|i| {
            let mut acc = RInterval::ZERO;
            for (aij, xj) in a.row(i).iter().zip(x) {
                acc = acc.add(aij.mul(*xj));
            }
            acc
        })
        .collect()
}

/// `|A| v` for a nonnegative profile vector `v`: upper bounds per row.
pub fn cabs_matvec_ub(a: &Mat<CInterval>, v: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols, v.len());
    (0..a.nrows)
        .map(|i| {
            let mut acc = RInterval::ZERO;
            for (aij, vj) in a.row(i).iter().zip(v) {
                acc = acc.add(RInterval::new(0.0, aij.mod_ub()).scale(*vj));
            }
            acc.hi
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite")
    }

    #[test]
    fn real_matmul_contains_exact_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _case in 0..60 {
            let (ni, nk, nj) =
                (rng.gen_range(1..8), rng.gen_range(1..8), rng.gen_range(1..8));
            let mut pa = Vec::new();
            let a = Mat::from_fn(ni, nk, |_, _| {
                let c = (rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-6..7));
                let w = rng.gen::<f64>() * c.abs() * 1e-6;
                pa.push(c);
                RInterval::new(c - w, c + w)
            });
            let mut pb = Vec::new();
            let b = Mat::from_fn(nk, nj, |_, _| {
                let c = (rng.gen::<f64>() - 0.5) * 10f64.powi(rng.gen_range(-6..7));
                let w = rng.gen::<f64>() * c.abs() * 1e-6;
                pb.push(c);
                RInterval::new(c - w, c + w)
            });
            let c = rinterval_matmul(&a, &b);
            for i in 0..ni {
                for j in 0..nj {
                    let mut exact = BigRational::from(BigInt::from(0));
                    for k in 0..nk {
                        exact += rat(pa[i * nk + k]) * rat(pb[k * nj + j]);
                    }
                    let e = c[(i, j)];
                    assert!(
                        rat(e.lo) <= exact && exact <= rat(e.hi),
                        "entry ({i},{j}) of {ni}x{nk}x{nj}"
                    );
                }
            }
        }
    }

    #[test]
    fn complex_matmul_contains_exact_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _case in 0..40 {
            let (ni, nk, nj) =
                (rng.gen_range(1..6), rng.gen_range(1..6), rng.gen_range(1..6));
            let mut pa = Vec::new();
            let a = Mat::from_fn(ni, nk, |_, _| {
                let z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 3.0;
                pa.push(z);
                CInterval::point(z)
            });
            let mut pb = Vec::new();
            let b = Mat::from_fn(nk, nj, |_, _| {
                let z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5) * 3.0;
                pb.push(z);
                CInterval::point(z)
            });
            let c = cinterval_matmul(&a, &b);
            for i in 0..ni {
                for j in 0..nj {
                    let mut ere = BigRational::from(BigInt::from(0));
                    let mut eim = BigRational::from(BigInt::from(0));
                    for k in 0..nk {
                        let (x, y) = (pa[i * nk + k], pb[k * nj + j]);
                        ere += rat(x.re) * rat(y.re) - rat(x.im) * rat(y.im);
                        eim += rat(x.re) * rat(y.im) + rat(x.im) * rat(y.re);
                    }
                    let e = c[(i, j)];
                    assert!(rat(e.re.lo) <= ere && ere <= rat(e.re.hi));
                    assert!(rat(e.im.lo) <= eim && eim <= rat(e.im.hi));
                }
            }
        }
    }

    #[test]
    fn matvec_contains_exact_result() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 17;
        let mut pa = Vec::new();
        let a = Mat::from_fn(n, n, |_, _| {
            let z = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            pa.push(z);
            CInterval::point(z)
        });
        let px: Vec<Complex64> =
            (0..n).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let x: Vec<CInterval> = px.iter().map(|&z| CInterval::point(z)).collect();
        let y = cmatvec(&a, &x);
        for i in 0..n {
            let mut ere = BigRational::from(BigInt::from(0));
            let mut eim = BigRational::from(BigInt::from(0));
            for k in 0..n {
                let (za, zx) = (pa[i * n + k], px[k]);
                ere += rat(za.re) * rat(zx.re) - rat(za.im) * rat(zx.im);
                eim += rat(za.re) * rat(zx.im) + rat(za.im) * rat(zx.re);
            }
            assert!(rat(y[i].re.lo) <= ere && ere <= rat(y[i].re.hi));
            assert!(rat(y[i].im.lo) <= eim && eim <= rat(y[i].im.hi));
        }
    }

    #[test]
    fn numerical_complex_product_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (ni, nk, nj) = (5, 7, 4);
        let a = Mat::from_fn(ni, nk, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let b = Mat::from_fn(nk, nj, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let c = cmm64(&a, &b);
        for i in 0..ni {
            for j in 0..nj {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..nk {
                    s += a[(i, k)] * b[(k, j)];
                }
                assert!((c[(i, j)] - s).norm() < 1e-12);
            }
        }
    }
}
