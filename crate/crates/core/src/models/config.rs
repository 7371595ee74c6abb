//! Flat key-value serialization of [`ModelSpec`]: JSON and an INI-like text form.

use serde_json::{Map, Value};

use super::ModelSpec;
use crate::{Error, Result};

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse `key = value` lines. Blank lines, `#`/`;` comments and
    /// `[section]` headers are skipped.
    pub fn from_ini(text: &str) -> Result<Self> {
        let mut map = Map::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') || line.starts_with('[') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            map.insert(key.trim().to_string(), ini_value(value.trim()));
        }
        Ok(serde_json::from_value(Value::Object(map))?)
    }

    pub fn to_ini(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut out = String::new();
        if let Value::Object(map) = value {
            for (k, v) in map {
                match v {
                    Value::String(s) => out.push_str(&format!("{k} = {s}\n")),
                    other => out.push_str(&format!("{k} = {other}\n")),
                }
            }
        }
        Ok(out)
    }
}

fn ini_value(raw: &str) -> Value {
    let unquoted = raw.trim_matches('"');
    if let Ok(b) = unquoted.parse::<bool>() {
        return Value::Bool(b);
    }
    if let Ok(n) = unquoted.parse::<u64>() {
        return Value::from(n);
    }
    if let Ok(x) = unquoted.parse::<f64>() {
        if let Some(n) = serde_json::Number::from_f64(x) {
            return Value::Number(n);
        }
    }
    Value::String(unquoted.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use proptest::prelude::*;

    #[test]
    fn json_keys_use_symbol_names() {
        let spec = ModelSpec::interacting(12, 1.0, 2.0, 2.0, 1.0);
        let json = spec.to_json().unwrap();
        for key in ["\"t0\"", "\"mu0\"", "\"Delta\"", "\"U\"", "\"Jperp\"", "\"Jz\"", "\"h\"", "\"tl\"", "\"tr\"", "\"mul\"", "\"mur\"", "\"L\""] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
    }

    #[test]
    fn ini_parses_with_defaults() {
        let text = "# spin chain\n[model]\nmodel = xxz\nL = 12\nh = 7\nJz = 0.5\n";
        let spec = ModelSpec::from_ini(text).unwrap();
        assert_eq!(spec.kind, ModelKind::XxzSpin);
        assert_eq!(spec.l, 12);
        assert_eq!(spec.h, 7.0);
        assert_eq!(spec.jz, 0.5);
        assert_eq!(spec.jperp, 1.0);
        assert!(spec.boundary_on);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ModelSpec::from_ini("model = free\nL = 8\nmu = 3\n").is_err());
        assert!(ModelSpec::from_ini("model = free\nL 8\n").is_err());
    }

    proptest! {
        #[test]
        fn ini_and_json_roundtrip(l in 4usize..64, mu0 in -20.0f64..20.0, u in -5.0f64..5.0, on: bool) {
            let mut spec = ModelSpec::interacting(l, 1.0, mu0, u, 0.5);
            spec.boundary_on = on;
            prop_assert_eq!(&ModelSpec::from_ini(&spec.to_ini().unwrap()).unwrap(), &spec);
            prop_assert_eq!(&ModelSpec::from_json(&spec.to_json().unwrap()).unwrap(), &spec);
        }
    }
}
