//! Stable float formatting for reports.

use serde_json::Value;

/// Significant digits kept in every serialized report float.
pub const REPORT_DIGITS: usize = 12;

/// Rounds `x` to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Shortest decimal rendering of `x` after rounding to report precision.
pub fn format_float(x: f64) -> String {
    let r = round_sig(x, REPORT_DIGITS);
    if r == 0.0 {
        return "0".into();
    }
    format!("{r}")
}

/// Rounds every float in a JSON tree in place; integers are untouched.
pub fn round_json_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                if let Some(m) = serde_json::Number::from_f64(round_sig(x, REPORT_DIGITS)) {
                    *n = m;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json_floats),
        Value::Object(map) => map.values_mut().for_each(round_json_floats),
        _ => {}
    }
}

/// Pretty JSON with report-precision floats and a trailing newline.
pub fn to_report_json<T: serde::Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("report values serialize");
    round_json_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    s.push('\n');
    s
}
