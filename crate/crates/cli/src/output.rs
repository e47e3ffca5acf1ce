//! Deterministic rendering: every float is rounded to 12 significant digits.

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round12(n.as_f64().expect("f64 number"));
            if let Some(r) = serde_json::Number::from_f64(x) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String, CliError> {
    let mut value = serde_json::to_value(report)
        .map_err(|e| CliError::Numerical(format!("report serialization failed: {e}")))?;
    round_value(&mut value);
    let mut s = serde_json::to_string_pretty(&value).expect("values always serialize");
    s.push('\n');
    Ok(s)
}

pub fn csv_number(v: f64) -> String {
    format!("{}", round12(v))
}

pub fn csv_optional(v: Option<f64>) -> String {
    v.map(csv_number).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(csv_number(23.0 / 12.0), "1.91666666667");
        assert_eq!(csv_number(0.5), "0.5");
        assert_eq!(csv_number(4f64.exp()), "54.5981500331");
        assert_eq!(csv_optional(None), "");
    }

    #[test]
    fn json_rounds_nested_floats() {
        let s = to_json(&serde_json::json!({"a": [1.0 / 3.0], "b": {"c": 2}})).unwrap();
        assert!(s.contains("0.333333333333"));
        assert!(!s.contains("0.3333333333333"));
        assert!(s.contains("\"c\": 2"));
    }
}
