//! Weighted coefficient sequences and their convolution algebra.

use crate::SeqError;
use rigor::hexfloat;
use rigor::{CInterval, RInterval};
use serde_json::{json, Value};

/// Structural symmetry of a bi-infinite sequence.
///
/// `Conjugate` and `Even` sequences store only the indices `k >= 0`; the
/// negative side is defined by the symmetry and never materialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    None,
    /// `a_{-k} = conj(a_k)`, with `a_0` exactly real.
    Conjugate,
    /// `a_{-k} = a_k`.
    Even,
}

impl Symmetry {
    fn as_str(self) -> &'static str {
        match self {
            Symmetry::None => "none",
            Symmetry::Conjugate => "conjugate",
            Symmetry::Even => "even",
        }
    }

    fn parse(s: &str) -> Result<Self, SeqError> {
        match s {
            "none" => Ok(Symmetry::None),
            "conjugate" => Ok(Symmetry::Conjugate),
            "even" => Ok(Symmetry::Even),
            other => Err(SeqError::Usage(format!("unknown symmetry tag {other:?}"))),
        }
    }
}

/// Finitely supported sequence `(a_k)` measured in the norm
/// `sum_k |a_k| nu^|k|`.
///
/// Entries outside the stored range are implicitly zero. Storage is a dense
/// block with an offset: two-sided for `Symmetry::None` (indices
/// `lo..lo+len`), one-sided from zero for the symmetric tags.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSequence {
    nu: f64,
    sym: Symmetry,
    lo: i64,
    data: Vec<CInterval>,
}

impl WeightedSequence {
    /// General two-sided sequence with entries at `lo, lo+1, ...`.
    pub fn two_sided(nu: f64, lo: i64, data: Vec<CInterval>) -> Self {
        assert!(nu >= 1.0, "weight must satisfy nu >= 1");
        WeightedSequence { nu, sym: Symmetry::None, lo, data }
    }

    /// Conjugate-symmetric sequence from its `k >= 0` half.
    ///
    /// Panics if the zero coefficient has a nonzero imaginary enclosure;
    /// callers symmetrize before constructing.
    pub fn conjugate(nu: f64, data: Vec<CInterval>) -> Self {
        assert!(nu >= 1.0, "weight must satisfy nu >= 1");
        if let Some(a0) = data.first() {
            assert!(
                a0.im == RInterval::ZERO,
                "zero mode of a conjugate-symmetric sequence must be real"
            );
        }
        WeightedSequence { nu, sym: Symmetry::Conjugate, lo: 0, data }
    }

    /// Even sequence from its `k >= 0` half.
    pub fn even(nu: f64, data: Vec<CInterval>) -> Self {
        assert!(nu >= 1.0, "weight must satisfy nu >= 1");
        WeightedSequence { nu, sym: Symmetry::Even, lo: 0, data }
    }

    pub fn zero(nu: f64, sym: Symmetry) -> Self {
        assert!(nu >= 1.0, "weight must satisfy nu >= 1");
        WeightedSequence { nu, sym, lo: 0, data: Vec::new() }
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn symmetry(&self) -> Symmetry {
        self.sym
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of stored entries.
    pub fn stored_len(&self) -> usize {
        self.data.len()
    }

    /// Largest `|k|` with a stored entry, or -1 when empty.
    pub fn kmax(&self) -> i64 {
        if self.data.is_empty() {
            return -1;
        }
        match self.sym {
            Symmetry::None => {
                let hi = self.lo + self.data.len() as i64 - 1;
                self.lo.abs().max(hi.abs())
            }
            _ => self.data.len() as i64 - 1,
        }
    }

    /// Stored index range as `(first, last)` for `Symmetry::None`, and
    /// `(0, kmax)` for symmetric storage.
    pub fn stored_range(&self) -> (i64, i64) {
        if self.data.is_empty() {
            (0, -1)
        } else {
            (self.lo, self.lo + self.data.len() as i64 - 1)
        }
    }

    pub fn get(&self, k: i64) -> CInterval {
        match self.sym {
            Symmetry::None => {
                let idx = k - self.lo;
                if idx >= 0 && (idx as usize) < self.data.len() {
                    self.data[idx as usize]
                } else {
                    CInterval::ZERO
                }
            }
            Symmetry::Conjugate => {
                let idx = k.unsigned_abs() as usize;
                if idx < self.data.len() {
                    if k >= 0 {
                        self.data[idx]
                    } else {
                        self.data[idx].conj()
                    }
                } else {
                    CInterval::ZERO
                }
            }
            Symmetry::Even => {
                let idx = k.unsigned_abs() as usize;
                if idx < self.data.len() {
                    self.data[idx]
                } else {
                    CInterval::ZERO
                }
            }
        }
    }

    /// Materialize the full two-sided storage, dropping the symmetry tag.
    pub fn to_two_sided(&self) -> Self {
        match self.sym {
            Symmetry::None => self.clone(),
            _ => {
                let kmax = self.kmax();
                if kmax < 0 {
                    return WeightedSequence::zero(self.nu, Symmetry::None);
                }
                let data = (-kmax..=kmax).map(|k| self.get(k)).collect();
                WeightedSequence::two_sided(self.nu, -kmax, data)
            }
        }
    }

    /// Pointwise sum. Operands must share the weight; differing symmetry
    /// tags fall back to two-sided storage.
    pub fn add(&self, other: &Self) -> Result<Self, SeqError> {
        check_nu(self, other)?;
        if self.sym != other.sym {
            return self.to_two_sided().add(&other.to_two_sided());
        }
        if self.data.is_empty() {
            return Ok(other.clone());
        }
        if other.data.is_empty() {
            return Ok(self.clone());
        }
        match self.sym {
            Symmetry::None => {
                let lo = self.lo.min(other.lo);
                let hi = (self.lo + self.data.len() as i64 - 1)
                    .max(other.lo + other.data.len() as i64 - 1);
                let data = (lo..=hi).map(|k| self.get(k).add(other.get(k))).collect();
                Ok(WeightedSequence { nu: self.nu, sym: Symmetry::None, lo, data })
            }
            sym => {
                let len = self.data.len().max(other.data.len());
                let data = (0..len as i64).map(|k| self.get(k).add(other.get(k))).collect();
                Ok(WeightedSequence { nu: self.nu, sym, lo: 0, data })
            }
        }
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z = z.neg();
        }
        out
    }

    /// Multiply every coefficient by a real interval scalar. Preserves the
    /// symmetry tag (a real factor commutes with conjugation).
    pub fn scale_real(&self, c: RInterval) -> Self {
        let mut out = self.clone();
        for z in &mut out.data {
            *z = z.mul_real(c);
        }
        out
    }

    /// Map stored coefficients as `(k, a_k) -> b_k`.
    ///
    /// For symmetric tags the map sees only `k >= 0`; the caller must ensure
    /// `f(-k, conj(a)) = conj(f(k, a))` (respectively evenness), which holds
    /// for all uses here (mode-wise multipliers with real or `i*k`-type
    /// factors).
    pub fn map_stored(&self, mut f: impl FnMut(i64, CInterval) -> CInterval) -> Self {
        let mut out = self.clone();
        for (i, z) in out.data.iter_mut().enumerate() {
            *z = f(self.lo + i as i64, *z);
        }
        if out.sym == Symmetry::Conjugate {
            if let Some(a0) = out.data.first_mut() {
                a0.im = RInterval::ZERO;
            }
        }
        out
    }

    /// Drop modes with `|k| >= m`; returns the truncated sequence and an
    /// enclosure of the norm of the discarded part.
    pub fn truncate_modes(&self, m: i64) -> (Self, RInterval) {
        assert!(m >= 0);
        let w = weights(self.nu, self.kmax().max(0) as usize);
        let mut discarded = RInterval::ZERO;
        let mut out = self.clone();
        match self.sym {
            Symmetry::None => {
                let (first, last) = self.stored_range();
                for k in first..=last {
                    if k.abs() >= m {
                        let t = self.get(k).modulus().mul(w[k.unsigned_abs() as usize]);
                        discarded = discarded.add(t);
                    }
                }
                let lo = first.max(-(m - 1).max(0));
                let hi = last.min((m - 1).max(0));
                if lo > hi || m == 0 {
                    out = WeightedSequence::zero(self.nu, self.sym);
                } else {
                    out.lo = lo;
                    out.data = (lo..=hi).map(|k| self.get(k)).collect();
                }
            }
            _ => {
                let kmax = self.kmax();
                for k in 0..=kmax.max(-1) {
                    if k >= m {
                        let t = self.get(k).modulus().mul(w[k as usize]);
                        let t = if k > 0 { t.scale(2.0) } else { t };
                        discarded = discarded.add(t);
                    }
                }
                out.data.truncate(m.max(0) as usize);
            }
        }
        (out, discarded)
    }

    /// Enclosure of `sum_k |a_k| nu^|k|`.
    pub fn norm(&self) -> RInterval {
        norm_1nu(self)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .data
            .iter()
            .enumerate()
            .map(|(i, z)| {
                json!({
                    "k": self.lo + i as i64,
                    "re": [hexfloat::format_f64(z.re.lo), hexfloat::format_f64(z.re.hi)],
                    "im": [hexfloat::format_f64(z.im.lo), hexfloat::format_f64(z.im.hi)],
                })
            })
            .collect();
        json!({
            "nu": hexfloat::format_f64(self.nu),
            "sym": self.sym.as_str(),
            "coeffs": coeffs,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeqError> {
        let bad = |msg: &str| SeqError::Usage(format!("malformed sequence JSON: {msg}"));
        let nu = parse_hex(v.get("nu").ok_or_else(|| bad("missing nu"))?)?;
        let sym = Symmetry::parse(
            v.get("sym").and_then(Value::as_str).ok_or_else(|| bad("missing sym"))?,
        )?;
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing coeffs"))?;
        if coeffs.is_empty() {
            return Ok(WeightedSequence::zero(nu, sym));
        }
        let mut entries = Vec::with_capacity(coeffs.len());
        for c in coeffs {
            let k = c.get("k").and_then(Value::as_i64).ok_or_else(|| bad("missing k"))?;
            entries.push((k, parse_box(c)?));
        }
        let lo = entries.iter().map(|e| e.0).min().unwrap();
        let hi = entries.iter().map(|e| e.0).max().unwrap();
        if sym != Symmetry::None && lo < 0 {
            return Err(bad("symmetric sequence with negative stored index"));
        }
        let start = if sym == Symmetry::None { lo } else { 0 };
        let mut data = vec![CInterval::ZERO; (hi - start + 1) as usize];
        for (k, z) in entries {
            data[(k - start) as usize] = z;
        }
        Ok(match sym {
            Symmetry::None => WeightedSequence::two_sided(nu, start, data),
            Symmetry::Conjugate => WeightedSequence::conjugate(nu, data),
            Symmetry::Even => WeightedSequence::even(nu, data),
        })
    }
}

fn parse_hex(v: &Value) -> Result<f64, SeqError> {
    let s = v
        .as_str()
        .ok_or_else(|| SeqError::Usage("expected hex-float string".into()))?;
    hexfloat::parse_f64(s).map_err(|e| SeqError::Usage(format!("bad hex float: {e}")))
}

fn parse_box(c: &Value) -> Result<CInterval, SeqError> {
    let pair = |name: &str| -> Result<RInterval, SeqError> {
        let arr = c
            .get(name)
            .and_then(Value::as_array)
            .filter(|a| a.len() == 2)
            .ok_or_else(|| SeqError::Usage(format!("missing endpoint pair {name:?}")))?;
        Ok(RInterval::new(parse_hex(&arr[0])?, parse_hex(&arr[1])?))
    };
    Ok(CInterval { re: pair("re")?, im: pair("im")? })
}

fn check_nu(a: &WeightedSequence, b: &WeightedSequence) -> Result<(), SeqError> {
    if a.nu != b.nu {
        return Err(SeqError::Usage(format!(
            "mismatched weights nu = {} vs {}: re-weight explicitly before combining",
            a.nu, b.nu
        )));
    }
    Ok(())
}

/// `[1, nu, nu^2, ...]` as interval enclosures up to exponent `kmax`.
pub fn weights(nu: f64, kmax: usize) -> Vec<RInterval> {
    let nui = RInterval::point(nu);
    let mut w = Vec::with_capacity(kmax + 1);
    w.push(RInterval::ONE);
    for k in 1..=kmax {
        w.push(w[k - 1].mul(nui));
    }
    w
}

/// Enclosure of the weighted norm `sum_k |a_k| nu^|k|`.
///
/// Exact summation order: ascending stored index, so repeated runs produce
/// identical endpoints.
pub fn norm_1nu(a: &WeightedSequence) -> RInterval {
    if a.data.is_empty() {
        return RInterval::ZERO;
    }
    let w = weights(a.nu, a.kmax() as usize);
    let mut acc = RInterval::ZERO;
    match a.sym {
        Symmetry::None => {
            let (first, last) = a.stored_range();
            for k in first..=last {
                acc = acc.add(a.get(k).modulus().mul(w[k.unsigned_abs() as usize]));
            }
        }
        _ => {
            for k in 0..a.data.len() {
                let t = a.data[k].modulus().mul(w[k]);
                acc = acc.add(if k > 0 { t.scale(2.0) } else { t });
            }
        }
    }
    acc
}

/// Enclosure of the dual norm `sup_k |c_k| nu^{-|k|}`.
pub fn norm_inf_dual(c: &WeightedSequence, nu: f64) -> RInterval {
    if c.data.is_empty() {
        return RInterval::ZERO;
    }
    let w = weights(nu, c.kmax() as usize);
    let (first, last) = match c.sym {
        Symmetry::None => c.stored_range(),
        _ => (0, c.data.len() as i64 - 1),
    };
    let mut lo = 0.0f64;
    let mut hi = 0.0f64;
    for k in first..=last {
        let t = c
            .get(k)
            .modulus()
            .div(w[k.unsigned_abs() as usize])
            .expect("positive weight");
        lo = lo.max(t.lo);
        hi = hi.max(t.hi);
    }
    RInterval::new(lo, hi)
}

/// Discrete convolution `(a * b)_k = sum_j a_j b_{k-j}`.
///
/// Requires equal weights. The symmetry tag is preserved when both operands
/// share it (the convolution of two conjugate-symmetric or two even
/// sequences has the same symmetry); mixed tags produce a two-sided result.
pub fn conv(a: &WeightedSequence, b: &WeightedSequence) -> Result<WeightedSequence, SeqError> {
    check_nu(a, b)?;
    if a.data.is_empty() || b.data.is_empty() {
        let sym = if a.sym == b.sym { a.sym } else { Symmetry::None };
        return Ok(WeightedSequence::zero(a.nu, sym));
    }
    match (a.sym, b.sym) {
        (Symmetry::Conjugate, Symmetry::Conjugate) => {
            let mut data = conv_one_sided(a, b);
            data[0].im = RInterval::ZERO;
            Ok(WeightedSequence { nu: a.nu, sym: Symmetry::Conjugate, lo: 0, data })
        }
        (Symmetry::Even, Symmetry::Even) => {
            let data = conv_one_sided(a, b);
            Ok(WeightedSequence { nu: a.nu, sym: Symmetry::Even, lo: 0, data })
        }
        _ => {
            let a2 = a.to_two_sided();
            let b2 = b.to_two_sided();
            let (alo, ahi) = a2.stored_range();
            let (blo, bhi) = b2.stored_range();
            let lo = alo + blo;
            let hi = ahi + bhi;
            let mut data = Vec::with_capacity((hi - lo + 1) as usize);
            for k in lo..=hi {
                let jmin = alo.max(k - bhi);
                let jmax = ahi.min(k - blo);
                let mut acc = CInterval::ZERO;
                for j in jmin..=jmax {
                    acc = acc.add(a2.get(j).mul(b2.get(k - j)));
                }
                data.push(acc);
            }
            Ok(WeightedSequence { nu: a.nu, sym: Symmetry::None, lo, data })
        }
    }
}

/// The `k >= 0` half of the convolution of two symmetric sequences, with
/// negative-side operand values resolved through `get`.
fn conv_one_sided(a: &WeightedSequence, b: &WeightedSequence) -> Vec<CInterval> {
    let ka = a.kmax();
    let kb = b.kmax();
    let mut data = Vec::with_capacity((ka + kb + 1) as usize);
    for k in 0..=(ka + kb) {
        let jmin = (-ka).max(k - kb);
        let jmax = ka.min(k + kb);
        let mut acc = CInterval::ZERO;
        for j in jmin..=jmax {
            acc = acc.add(a.get(j).mul(b.get(k - j)));
        }
        data.push(acc);
    }
    data
}
