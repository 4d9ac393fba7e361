//! Canonical JSON: keys sorted, floats as `d.dddddddddddddde±XX` (15
//! significant digits), non-finite floats as `null`, no whitespace.
//!
//! Fifteen digits always survive a decimal -> `f64` -> decimal round trip, so
//! parsing canonical output and writing it again reproduces the same bytes.

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: &str = "1";

/// `x` in the canonical float format.
pub fn format_float(x: f64) -> String {
    let s = format!("{x:.14e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A float as a JSON value; non-finite values become `null`.
pub fn float(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

/// Serializes `value` canonically.
pub fn to_canonical(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out
}

/// Any serializable value, through [`serde_json::to_value`].
pub fn canonical<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(to_canonical(&serde_json::to_value(value)?))
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(x) if x.is_finite() => out.push_str(&format_float(x)),
                    _ => out.push_str("null"),
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => write_object(map, out),
    }
}

fn write_object(map: &Map<String, Value>, out: &mut String) {
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort();
    out.push('{');
    for (i, key) in keys.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&Value::String(key.clone()).to_string());
        out.push(':');
        write_value(&map[key], out);
    }
    out.push('}');
}

/// `{command, params, payload, schema_version}`.
pub fn envelope(command: &str, params: Value, payload: Value) -> Value {
    let mut map = Map::new();
    map.insert("command".into(), Value::from(command));
    map.insert("params".into(), params);
    map.insert("payload".into(), payload);
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    Value::Object(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn float_format() {
        assert_eq!(format_float(720.0), "7.20000000000000e+02");
        assert_eq!(format_float(1.5e-7), "1.50000000000000e-07");
        assert_eq!(format_float(0.0), "0.00000000000000e+00");
        assert_eq!(format_float(-2.5e123), "-2.50000000000000e+123");
    }

    #[test]
    fn sorted_and_round_trips() {
        let v = json!({"z": 1, "a": [0.1, "x", null, true], "m": {"b": 1e300, "a": -3}});
        let s = to_canonical(&v);
        assert_eq!(
            s,
            r#"{"a":[1.00000000000000e-01,"x",null,true],"m":{"a":-3,"b":1.00000000000000e+300},"z":1}"#
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(to_canonical(&back), s);
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(float(f64::NAN), Value::Null);
        assert_eq!(to_canonical(&json!({"x": float(f64::INFINITY)})), r#"{"x":null}"#);
    }
}
