//! Taylor-graded stacks of weighted sequences and the two-variable
//! Cauchy-convolution products, plus derivative bounds obtained from norm
//! control on slightly shrunk domains.

use crate::seq::{conv, norm_1nu, weights, Symmetry, WeightedSequence};
use crate::SeqError;
use rigor::hexfloat;
use rigor::RInterval;
use serde_json::{json, Value};

/// Finite jet of weighted sequences graded by Taylor order.
///
/// Order `alpha` holds the Fourier data of the coefficient of `sigma^alpha`.
/// All orders share the weight, the symmetry tag, and the angular frequency
/// of the underlying angle variable.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTaylorSeries {
    nu: f64,
    omega: RInterval,
    sym: Symmetry,
    orders: Vec<WeightedSequence>,
}

impl FourierTaylorSeries {
    pub fn new(
        nu: f64,
        omega: RInterval,
        sym: Symmetry,
        orders: Vec<WeightedSequence>,
    ) -> Result<Self, SeqError> {
        for (alpha, a) in orders.iter().enumerate() {
            if a.nu() != nu {
                return Err(SeqError::Usage(format!(
                    "order {alpha} carries weight {} but the series uses {nu}",
                    a.nu()
                )));
            }
            if a.symmetry() != sym && !a.is_empty() {
                return Err(SeqError::Usage(format!(
                    "order {alpha} breaks the shared symmetry tag"
                )));
            }
        }
        Ok(FourierTaylorSeries { nu, omega, sym, orders })
    }

    pub fn zero(nu: f64, omega: RInterval, sym: Symmetry, n_orders: usize) -> Self {
        let orders = (0..n_orders).map(|_| WeightedSequence::zero(nu, sym)).collect();
        FourierTaylorSeries { nu, omega, sym, orders }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> RInterval {
        self.omega
    }

    pub fn symmetry(&self) -> Symmetry {
        self.sym
    }

    pub fn n_orders(&self) -> usize {
        self.orders.len()
    }

    /// Sequence at Taylor order `alpha`, zero beyond the stored jet.
    pub fn order(&self, alpha: usize) -> WeightedSequence {
        self.orders
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| WeightedSequence::zero(self.nu, self.sym))
    }

    pub fn orders(&self) -> &[WeightedSequence] {
        &self.orders
    }

    /// Enclosure of the stacked norm `sum_alpha ||x_alpha||`.
    pub fn xnorm(&self) -> RInterval {
        let mut acc = RInterval::ZERO;
        for a in &self.orders {
            acc = acc.add(norm_1nu(a));
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        json!({
            "nu": hexfloat::format_f64(self.nu),
            "omega": [
                hexfloat::format_f64(self.omega.lo),
                hexfloat::format_f64(self.omega.hi),
            ],
            "sym": match self.sym {
                Symmetry::None => "none",
                Symmetry::Conjugate => "conjugate",
                Symmetry::Even => "even",
            },
            "orders": self.orders.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeqError> {
        let bad = |msg: &str| SeqError::Usage(format!("malformed series JSON: {msg}"));
        let hex = |x: &Value| -> Result<f64, SeqError> {
            hexfloat::parse_f64(
                x.as_str().ok_or_else(|| bad("expected hex-float string"))?,
            )
            .map_err(|e| SeqError::Usage(format!("bad hex float: {e}")))
        };
        let nu = hex(v.get("nu").ok_or_else(|| bad("missing nu"))?)?;
        let om = v
            .get("omega")
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| bad("missing omega"))?;
        let omega = RInterval::new(hex(&om[0])?, hex(&om[1])?);
        let orders_json = v
            .get("orders")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing orders"))?;
        let mut orders = Vec::with_capacity(orders_json.len());
        for o in orders_json {
            orders.push(WeightedSequence::from_json(o)?);
        }
        let sym = orders.first().map(|a| a.symmetry()).unwrap_or(Symmetry::None);
        FourierTaylorSeries::new(nu, omega, sym, orders)
    }
}

/// Two-variable Cauchy-convolution product.
///
/// Order `alpha` of the result sums `conv(a_beta, b_{alpha-beta})` over the
/// Taylor splittings. With `drop_zero_orders` set, every term in which
/// either factor sits at order zero is omitted; that variant collects
/// exactly the contributions of the strictly lower-order data.
pub fn cc_prod(
    a: &FourierTaylorSeries,
    b: &FourierTaylorSeries,
    drop_zero_orders: bool,
) -> Result<FourierTaylorSeries, SeqError> {
    if a.nu != b.nu {
        return Err(SeqError::Usage(format!(
            "mismatched weights nu = {} vs {}",
            a.nu, b.nu
        )));
    }
    if a.omega != b.omega {
        return Err(SeqError::Usage("mismatched angular frequencies".into()));
    }
    if a.orders.is_empty() || b.orders.is_empty() {
        return Ok(FourierTaylorSeries::zero(a.nu, a.omega, a.sym, 0));
    }
    let n_out = a.orders.len() + b.orders.len() - 1;
    let mut orders = Vec::with_capacity(n_out);
    for alpha in 0..n_out {
        let mut acc: Option<WeightedSequence> = None;
        for beta in 0..=alpha {
            let gamma = alpha - beta;
            if beta >= a.orders.len() || gamma >= b.orders.len() {
                continue;
            }
            if drop_zero_orders && (beta == 0 || gamma == 0) {
                continue;
            }
            let term = conv(&a.orders[beta], &b.orders[gamma])?;
            acc = Some(match acc {
                None => term,
                Some(s) => s.add(&term)?,
            });
        }
        orders.push(acc.unwrap_or_else(|| {
            let sym = if a.sym == b.sym { a.sym } else { Symmetry::None };
            WeightedSequence::zero(a.nu, sym)
        }));
    }
    let sym = orders
        .iter()
        .find(|o| !o.is_empty())
        .map(|o| o.symmetry())
        .unwrap_or(a.sym);
    FourierTaylorSeries::new(a.nu, a.omega, sym, orders)
}

/// Zero out Taylor orders `>= n_keep` and Fourier modes `|k| >= m`; returns
/// the truncated series together with an enclosure of the discarded norm.
pub fn truncate(
    a: &FourierTaylorSeries,
    n_keep: usize,
    m: i64,
) -> (FourierTaylorSeries, RInterval) {
    let mut discarded = RInterval::ZERO;
    let mut orders = Vec::with_capacity(n_keep.min(a.orders.len()));
    for (alpha, seq) in a.orders.iter().enumerate() {
        if alpha >= n_keep {
            discarded = discarded.add(norm_1nu(seq));
        } else {
            let (t, d) = seq.truncate_modes(m);
            discarded = discarded.add(d);
            orders.push(t);
        }
    }
    let out = FourierTaylorSeries { nu: a.nu, omega: a.omega, sym: a.sym, orders };
    (out, discarded)
}

/// Upper bound on the first derivative of the function represented by a
/// Fourier coefficient sequence, valid on the strip narrowed by `sigma`.
///
/// With `nu = exp(omega * r)` the coefficients control the function on the
/// complex strip of half-width `r`; giving up `sigma` of that width yields
/// `sup |f'| <= ||a||_{1,nu} / (e * sigma)`.
pub fn cauchy_bound_fourier(
    a: &WeightedSequence,
    omega: RInterval,
    sigma: f64,
) -> Result<RInterval, SeqError> {
    if !(sigma > 0.0) {
        return Err(SeqError::Domain(format!("sigma = {sigma} must be positive")));
    }
    let ln_nu = RInterval::point(a.nu())
        .ln()
        .map_err(|e| SeqError::Domain(e.to_string()))?;
    if !(RInterval::point(sigma).mul(omega).hi < ln_nu.lo) {
        return Err(SeqError::Domain(format!(
            "sigma = {sigma} does not fit inside the strip ln(nu)/omega"
        )));
    }
    let e = RInterval::ONE.exp();
    let denom = e.mul(RInterval::point(sigma));
    norm_1nu(a).div(denom).map_err(|e| SeqError::Domain(e.to_string()))
}

/// Upper bound on the first derivative of the function represented by a
/// one-sided Taylor coefficient sequence, valid on the disk of radius
/// `nu * exp(-sigma)`: `sup |f'| <= ||a||_{1,nu} / (nu * sigma)`.
pub fn cauchy_bound_taylor(
    a: &WeightedSequence,
    sigma: f64,
) -> Result<RInterval, SeqError> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(SeqError::Domain(format!("sigma = {sigma} outside (0, 1]")));
    }
    let denom = RInterval::point(a.nu()).mul(RInterval::point(sigma));
    norm_1nu(a).div(denom).map_err(|e| SeqError::Domain(e.to_string()))
}

/// Enclosure of `sum_k |a_k| |k| nu^|k|`, the norm of the mode-scaled
/// sequence `(k a_k)`; used when differentiating in the angle variable.
pub fn norm_1nu_modescaled(a: &WeightedSequence) -> RInterval {
    if a.kmax() < 0 {
        return RInterval::ZERO;
    }
    let w = weights(a.nu(), a.kmax() as usize);
    let mut acc = RInterval::ZERO;
    let (first, last) = match a.symmetry() {
        Symmetry::None => a.stored_range(),
        _ => (-a.kmax(), a.kmax()),
    };
    for k in first..=last {
        let i = k.unsigned_abs() as usize;
        acc = acc.add(a.get(k).modulus().mul(w[i]).scale(i as f64));
    }
    acc
}
