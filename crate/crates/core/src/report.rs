//! Named residuals with a shared tolerance and optional per-entry overrides.

use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResidualReport {
    pub residuals: BTreeMap<String, f64>,
    pub tolerance: f64,
    /// Entries whose tolerance differs from the shared one.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
    /// Non-gated diagnostics (dimensions, parameter values, notes).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub info: BTreeMap<String, serde_json::Value>,
}

impl ResidualReport {
    pub fn new(tolerance: f64) -> Self {
        Self {
            residuals: BTreeMap::new(),
            tolerance,
            tolerances: BTreeMap::new(),
            info: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.residuals.insert(name.into(), value);
        self
    }

    pub fn push_with_tol(&mut self, name: impl Into<String>, value: f64, tol: f64) -> &mut Self {
        let name = name.into();
        if tol != self.tolerance {
            self.tolerances.insert(name.clone(), tol);
        }
        self.residuals.insert(name, value);
        self
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<serde_json::Value>) -> &mut Self {
        self.info.insert(key.into(), value.into());
        self
    }

    pub fn tolerance_of(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(self.tolerance)
    }

    pub fn entry_passes(&self, name: &str) -> bool {
        match self.residuals.get(name) {
            Some(v) => v.is_finite() && v.abs() < self.tolerance_of(name),
            None => false,
        }
    }

    /// Names of failing entries, in sorted order.
    pub fn failed(&self) -> Vec<String> {
        self.residuals
            .keys()
            .filter(|k| !self.entry_passes(k))
            .cloned()
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.residuals.keys().all(|k| self.entry_passes(k))
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.residuals.get(name).copied()
    }

    /// Copies entries of `other` in under `prefix.` keeping their effective tolerances.
    pub fn merge(&mut self, prefix: &str, other: &ResidualReport) {
        for (k, v) in &other.residuals {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            let tol = other.tolerance_of(k);
            self.push_with_tol(key, *v, tol);
        }
        for (k, v) in &other.info {
            let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
            self.info.insert(key, v.clone());
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("pass".into(), self.passed().into());
            map.insert("failed".into(), self.failed().into());
        }
        v
    }
}
