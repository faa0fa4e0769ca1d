//! Deterministic report output: sorted keys, floats at 12 significant digits.

use serde_json::{Map, Value};

pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0; // no signed zeros in output
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(round12(x))
    } else {
        // JSON has no NaN or inf
        Value::from(format!("{x}"))
    }
}

pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => num(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        other => other,
    }
}

pub fn json_string(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&canonical(v)).expect("json serializes");
    s.push('\n');
    s
}

pub fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{:.11e}", x + 0.0)
    } else {
        format!("{x}")
    }
}

pub fn matrix_rows(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect())).collect())
}
