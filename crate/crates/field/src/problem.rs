//! Problem-definition parsing: named built-in systems or inline monomial
//! lists, from a JSON value (TOML front ends convert before calling in).

use crate::poly::{Monomial, PolynomialVectorField};
use crate::systems::{lorenz, HillSystem};
use crate::FieldError;
use rigor::{hexfloat, RInterval};
use serde_json::Value;

/// A parsed problem definition.
#[derive(Clone, Debug)]
pub enum ProblemDef {
    Lorenz { sigma: RInterval, rho: RInterval, beta: RInterval },
    Hill { system: HillSystem },
    Custom { name: String, field: PolynomialVectorField },
}

impl ProblemDef {
    pub fn name(&self) -> String {
        match self {
            ProblemDef::Lorenz { .. } => "lorenz".to_string(),
            ProblemDef::Hill { .. } => "hill".to_string(),
            ProblemDef::Custom { name, .. } => name.clone(),
        }
    }

    pub fn field(&self) -> PolynomialVectorField {
        match self {
            ProblemDef::Lorenz { sigma, rho, beta } => lorenz(*sigma, *rho, *beta),
            ProblemDef::Hill { system } => system.field(),
            ProblemDef::Custom { field, .. } => field.clone(),
        }
    }

    /// Parse from a JSON value. The `system` key selects a built-in
    /// ("lorenz", "hill") with optional parameter overrides, or "custom"
    /// with an inline monomial list:
    ///
    /// ```text
    /// {"system": "lorenz", "sigma": 10, "rho": 28}
    /// {"system": "hill", "mu": 0.00095}
    /// {"system": "custom", "name": "...", "dim": 2,
    ///  "components": [[{"coef": 1.0, "exps": [0, 1]}], [...]]}
    /// ```
    ///
    /// Numeric values may be JSON numbers, `[lo, hi]` pairs, or canonical
    /// hex-float strings.
    pub fn from_json(v: &Value) -> Result<Self, FieldError> {
        let system = v
            .get("system")
            .and_then(Value::as_str)
            .ok_or_else(|| FieldError::Usage("problem definition needs a 'system' key".into()))?;
        match system {
            "lorenz" => {
                let sigma = opt_interval(v, "sigma")?.unwrap_or(RInterval::point(10.0));
                let rho = opt_interval(v, "rho")?.unwrap_or(RInterval::point(28.0));
                let beta = match opt_interval(v, "beta")? {
                    Some(b) => b,
                    None => RInterval::from_i64(8).div(RInterval::from_i64(3))?,
                };
                Ok(ProblemDef::Lorenz { sigma, rho, beta })
            }
            "hill" => {
                let mu = opt_interval(v, "mu")?.unwrap_or(RInterval::ZERO);
                Ok(ProblemDef::Hill { system: HillSystem::new(mu)? })
            }
            "custom" => {
                let name = v
                    .get("name")
                    .and_then(Value::as_str)
                    .unwrap_or("custom")
                    .to_string();
                let dim = v
                    .get("dim")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| FieldError::Usage("custom system needs 'dim'".into()))?
                    as usize;
                let comps_json = v
                    .get("components")
                    .and_then(Value::as_array)
                    .ok_or_else(|| FieldError::Usage("custom system needs 'components'".into()))?;
                let mut components = Vec::with_capacity(comps_json.len());
                for comp in comps_json {
                    let monos_json = comp.as_array().ok_or_else(|| {
                        FieldError::Usage("each component must be a monomial array".into())
                    })?;
                    let mut monos = Vec::with_capacity(monos_json.len());
                    for m in monos_json {
                        let coef = interval_value(
                            m.get("coef")
                                .ok_or_else(|| FieldError::Usage("monomial needs 'coef'".into()))?,
                        )?;
                        let exps_json = m.get("exps").and_then(Value::as_array).ok_or_else(
                            || FieldError::Usage("monomial needs 'exps'".into()),
                        )?;
                        let mut exps = Vec::with_capacity(exps_json.len());
                        for e in exps_json {
                            exps.push(e.as_u64().ok_or_else(|| {
                                FieldError::Usage("exponents must be nonnegative integers".into())
                            })? as u32);
                        }
                        monos.push(Monomial::new(coef, exps));
                    }
                    components.push(monos);
                }
                let mut params = Vec::new();
                if let Some(obj) = v.get("params").and_then(Value::as_object) {
                    for (k, pv) in obj {
                        params.push((k.clone(), interval_value(pv)?));
                    }
                }
                Ok(ProblemDef::Custom {
                    name,
                    field: PolynomialVectorField::new(dim, components, params)?,
                })
            }
            other => Err(FieldError::Usage(format!("unknown system {other:?}"))),
        }
    }
}

fn opt_interval(v: &Value, key: &str) -> Result<Option<RInterval>, FieldError> {
    match v.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(x) => Ok(Some(interval_value(x)?)),
    }
}

/// Accept a JSON number, a two-element `[lo, hi]` array, or a canonical
/// hex-float string.
pub fn interval_value(v: &Value) -> Result<RInterval, FieldError> {
    match v {
        Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| FieldError::Usage(format!("non-finite number {n}")))?;
            Ok(RInterval::point(x))
        }
        Value::String(s) => {
            let x = hexfloat::parse_f64(s)
                .map_err(|e| FieldError::Usage(format!("bad hex float {s:?}: {e}")))?;
            Ok(RInterval::point(x))
        }
        Value::Array(a) if a.len() == 2 => {
            let lo = scalar_value(&a[0])?;
            let hi = scalar_value(&a[1])?;
            if lo > hi {
                return Err(FieldError::Usage(format!("inverted interval [{lo}, {hi}]")));
            }
            Ok(RInterval::new(lo, hi))
        }
        other => Err(FieldError::Usage(format!("cannot read {other} as an interval"))),
    }
}

fn scalar_value(v: &Value) -> Result<f64, FieldError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| FieldError::Usage(format!("non-finite number {n}"))),
        Value::String(s) => hexfloat::parse_f64(s)
            .map_err(|e| FieldError::Usage(format!("bad hex float {s:?}: {e}"))),
        other => Err(FieldError::Usage(format!("cannot read {other} as a number"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn builtin_lorenz_parses_with_defaults() {
        let p = ProblemDef::from_json(&json!({"system": "lorenz"})).unwrap();
        let f = p.field();
        assert_eq!(f.dim(), 3);
        assert!(f.param("beta").unwrap().contains(8.0 / 3.0));
        assert_eq!(p.name(), "lorenz");
    }

    #[test]
    fn builtin_hill_parses_with_mass_ratio() {
        let p = ProblemDef::from_json(&json!({"system": "hill", "mu": 0.00095})).unwrap();
        let f = p.field();
        assert_eq!(f.dim(), 5);
        assert_eq!(f.degree(), 5);
    }

    #[test]
    fn custom_system_roundtrips_through_evaluation() {
        let p = ProblemDef::from_json(&json!({
            "system": "custom",
            "name": "rotor",
            "dim": 2,
            "components": [
                [{"coef": -1.0, "exps": [0, 1]}],
                [{"coef": [1.0, 1.0], "exps": [1, 0]}],
            ],
            "params": {"speed": 1.0},
        }))
        .unwrap();
        let f = p.field();
        let v = crate::poly::apply_field(
            &f,
            &[RInterval::point(0.5), RInterval::point(-0.25)],
        )
        .unwrap();
        assert!(v[0].contains(0.25));
        assert!(v[1].contains(0.5));
        assert!(f.param("speed").is_some());
    }

    #[test]
    fn malformed_definitions_are_rejected() {
        assert!(ProblemDef::from_json(&json!({})).is_err());
        assert!(ProblemDef::from_json(&json!({"system": "unknown"})).is_err());
        assert!(ProblemDef::from_json(&json!({"system": "hill", "mu": 0.9})).is_err());
        assert!(
            ProblemDef::from_json(&json!({"system": "custom", "dim": 1})).is_err()
        );
    }

    #[test]
    fn hex_float_scalars_are_accepted() {
        let p =
            ProblemDef::from_json(&json!({"system": "lorenz", "sigma": "0x1.4p+3"}));
        assert!(p.is_err(), "non-canonical hex floats must be rejected");
        let p = ProblemDef::from_json(&json!({"system": "lorenz", "sigma": "0x5p+1"}))
            .unwrap();
        match p {
            ProblemDef::Lorenz { sigma, .. } => assert!(sigma.contains(10.0)),
            _ => unreachable!(),
        }
    }
}
