//! Bit-exact hexadecimal text form for `f64` values.
//!
//! The canonical form is an integer mantissa times a power of two, e.g.
//! `0x1p+0` for 1.0 or `-0x323f6a88858a3p-48` for -pi, with trailing zero
//! bits stripped from the mantissa. Formatting and parsing are exact
//! inverses; the parser rejects any string that is not in canonical form,
//! so a certificate field cannot silently denote a different value.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HexFloatError {
    #[error("malformed hex float {0:?}")]
    Malformed(String),
    #[error("hex float {0:?} is not in canonical form")]
    NotCanonical(String),
    #[error("non-finite value cannot be serialized")]
    NonFinite,
}

/// Formats a finite `f64` exactly.
pub fn format_f64(x: f64) -> String {
    assert!(x.is_finite(), "non-finite value cannot be formatted");
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if biased == 0 {
        // Zero or subnormal: value = frac * 2^-1074.
        (frac, -1074i64)
    } else {
        ((1u64 << 52) | frac, biased - 1075)
    };
    if mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let shift = mant.trailing_zeros();
    mant >>= shift;
    exp += shift as i64;
    format!("{sign}0x{mant:x}p{exp:+}")
}

/// Parses a canonical hex float; rejects non-canonical spellings.
pub fn parse_f64(s: &str) -> Result<f64, HexFloatError> {
    let malformed = || HexFloatError::Malformed(s.to_string());
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x").ok_or_else(malformed)?;
    let p = rest.find(['p', 'P']).ok_or_else(malformed)?;
    let (mant_s, exp_s) = rest.split_at(p);
    let exp_s = &exp_s[1..];
    if mant_s.is_empty() || exp_s.is_empty() {
        return Err(malformed());
    }
    let mant = u64::from_str_radix(mant_s, 16).map_err(|_| malformed())?;
    let exp: i64 = exp_s.parse().map_err(|_| malformed())?;
    if mant >= (1u64 << 54) || !(-1100..=1100).contains(&exp) {
        return Err(HexFloatError::NotCanonical(s.to_string()));
    }
    let mut v = mant as f64;
    let mut e = exp;
    while e > 0 {
        let step = e.min(512);
        v *= f64::powi(2.0, step as i32);
        e -= step;
    }
    while e < 0 {
        let step = (-e).min(512);
        // Keep the final (possibly subnormal-reaching) scaling for last so
        // every intermediate stays in the normal range.
        if -e > 1000 && step == 512 {
            v *= f64::powi(2.0, -500);
            e += 500;
            continue;
        }
        v *= f64::powi(2.0, -(step as i32));
        e += step;
    }
    let v = if neg { -v } else { v };
    if !v.is_finite() {
        return Err(HexFloatError::NotCanonical(s.to_string()));
    }
    let canonical = format_f64(v);
    if canonical != s {
        return Err(HexFloatError::NotCanonical(s.to_string()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn known_values() {
        assert_eq!(format_f64(1.0), "0x1p+0");
        assert_eq!(format_f64(-0.5), "-0x1p-1");
        assert_eq!(format_f64(0.0), "0x0p+0");
        assert_eq!(format_f64(-0.0), "-0x0p+0");
        assert_eq!(format_f64(3.0), "0x3p+0");
        assert_eq!(parse_f64("0x1p+0").unwrap(), 1.0);
        assert_eq!(parse_f64("-0x0p+0").unwrap().to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn roundtrip_random_bit_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
        let mut n = 0;
        while n < 50_000 {
            let x = f64::from_bits(rng.gen::<u64>());
            if !x.is_finite() {
                continue;
            }
            n += 1;
            let s = format_f64(x);
            let back = parse_f64(&s).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn subnormals_roundtrip() {
        for &x in &[f64::MIN_POSITIVE, 5e-324, 3.0 * 5e-324, f64::MAX, -f64::MAX] {
            let s = format_f64(x);
            assert_eq!(parse_f64(&s).unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn non_canonical_is_rejected() {
        assert!(parse_f64("0x2p-1").is_err()); // canonical form of 1.0 is 0x1p+0
        assert!(parse_f64("0x1p+1000000").is_err());
        assert!(parse_f64("1.0").is_err());
        assert!(parse_f64("0x1.8p+1").is_err()); // fractional spellings are not canonical
    }
}
