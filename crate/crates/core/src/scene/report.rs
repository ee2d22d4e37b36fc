//! Canonical JSON: sorted keys, two-space indent, floats rounded to 12
//! significant digits. Writing, parsing and writing again is byte-identical.

use serde::Serialize;
use serde_json::{Map, Number, Value};

use super::SCHEMA_VERSION;
use crate::fitting::FitReport;

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("report schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported report schema_version {0}")]
    Version(String),
}

fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { 0.0 } else { v };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v).parse().expect("formatted float parses")
}

fn canonicalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = round_sig(n.as_f64().expect("f64 number"));
            // Whole floats stay floats so that reading back keeps the type.
            Number::from_f64(v).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>())
        }
        other => other,
    }
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match value {
        Value::Array(items) if !items.is_empty() => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 2);
                write_value(out, item, indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if !map.is_empty() => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                pad(out, indent + 2);
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[key], indent + 2);
            }
            out.push('\n');
            pad(out, indent);
            out.push('}');
        }
        scalar => out.push_str(&scalar.to_string()),
    }
}

/// Serializes any value in canonical form, with a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("value serializes to JSON");
    let mut out = String::new();
    write_value(&mut out, &canonicalize(value), 0);
    out.push('\n');
    out
}

/// Canonical report JSON, stamped with `schema_version`.
pub fn write_report(report: &FitReport) -> String {
    let mut value = serde_json::to_value(report).expect("report serializes");
    value
        .as_object_mut()
        .expect("report is an object")
        .insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    to_canonical_json(&value)
}

pub fn parse_report(text: &str) -> Result<FitReport, ReportError> {
    let schema = |path: String, message: String| ReportError::Schema { path, message };
    let mut value: Value = serde_json::from_str(text).map_err(|e| schema(".".into(), e.to_string()))?;
    let obj = value.as_object_mut().ok_or_else(|| schema(".".into(), "expected an object".into()))?;
    match obj.remove("schema_version") {
        Some(v) if v == Value::from(SCHEMA_VERSION) => {}
        Some(v) => return Err(ReportError::Version(v.to_string())),
        None => return Err(schema("schema_version".into(), "missing field".into())),
    }
    serde_path_to_error::deserialize(value).map_err(|e| schema(e.path().to_string(), e.inner().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::HypocycloidSpec;
    use crate::fitting::{verify_claim, FailureReason};
    use crate::geometry::{Circle, Point};
    use crate::simson::InscribedPolygon;
    use std::f64::consts::FRAC_PI_2;

    fn failing() -> FitReport {
        FitReport {
            spec: HypocycloidSpec::new(Point::new(0.1, -0.2), 1.0 / 3.0, 3, 0.0).unwrap(),
            rms: 0.123456789012345678,
            max_dev: 2.0,
            n_cusps_detected: 1,
            passed: false,
            notes: "only 1 cusp detected".into(),
            reason: Some(FailureReason::NotEnoughCusps),
            center_offset: None,
            trace: None,
        }
    }

    #[test]
    fn rounding_to_twelve_digits() {
        assert_eq!(round_sig(0.123456789012345678), 0.123456789012);
        assert_eq!(round_sig(-1.0 / 3.0), -0.333333333333);
        assert_eq!(round_sig(6.02214076e23), 6.02214076e23);
        assert_eq!(round_sig(-0.0), 0.0);
        let x = round_sig(std::f64::consts::PI);
        assert_eq!(round_sig(x), x);
    }

    #[test]
    fn failing_report_has_reason_code() {
        let text = write_report(&failing());
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["passed"], Value::Bool(false));
        assert_eq!(v["reason"], Value::from("not_enough_cusps"));
        assert_eq!(v["schema_version"], Value::from(1));
        assert_eq!(v["rms"], Value::from(0.123456789012));
    }

    #[test]
    fn keys_are_sorted_at_every_level() {
        let text = write_report(&failing());
        let keys: Vec<&str> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap())
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(keys.contains(&"schema_version"));
        let spec_keys: Vec<&str> =
            text.lines().filter(|l| l.starts_with("    \"")).map(|l| l.trim().split('"').nth(1).unwrap()).collect();
        assert_eq!(spec_keys, ["center", "cusps", "fixed_radius", "phase"]);
    }

    #[test]
    fn write_parse_write_is_stable() {
        let text = write_report(&failing());
        assert_eq!(write_report(&parse_report(&text).unwrap()), text);

        let poly = InscribedPolygon::regular(Circle::unit(), 3, FRAC_PI_2).unwrap();
        let report = verify_claim(&poly, 3, 720).unwrap();
        assert!(report.passed);
        let text = write_report(&report);
        let back = parse_report(&text).unwrap();
        assert_eq!(write_report(&back), text);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n_cusps_detected"], Value::from(3));
        assert_eq!(v["passed"], Value::Bool(true));
    }

    #[test]
    fn parse_errors() {
        let text = write_report(&failing());
        assert!(matches!(parse_report(&text.replace("\"schema_version\": 1", "\"schema_version\": 9")), Err(ReportError::Version(_))));
        let err = parse_report(&text.replace("\"max_dev\"", "\"maxdev\"")).unwrap_err();
        assert!(matches!(err, ReportError::Schema { .. }));
        let err = parse_report(&text.replace("\"passed\": false", "\"passed\": 0")).unwrap_err();
        assert_eq!(err, ReportError::Schema { path: "passed".into(), message: err_message(&err) });
    }

    fn err_message(e: &ReportError) -> String {
        match e {
            ReportError::Schema { message, .. } => message.clone(),
            _ => unreachable!(),
        }
    }
}
