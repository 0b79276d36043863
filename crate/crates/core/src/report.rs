//! Self-describing outcome of a verification test.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub format_version: u32,
    pub test: String,
    /// Name of the result being checked, e.g. "jammed-point concentration".
    pub anchor: String,
    pub parameters: BTreeMap<String, Value>,
    pub statistics: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
    pub pass: bool,
    pub replicas: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Left unset by the library; the CLI fills it only on request so that
    /// default reports stay byte-reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_secs: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl StatReport {
    pub fn new(test: impl Into<String>, anchor: impl Into<String>) -> Self {
        StatReport {
            format_version: REPORT_FORMAT_VERSION,
            test: test.into(),
            anchor: anchor.into(),
            parameters: BTreeMap::new(),
            statistics: BTreeMap::new(),
            thresholds: BTreeMap::new(),
            pass: false,
            replicas: 0,
            seed: None,
            wall_clock_secs: None,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    /// Records a statistic. Non-finite values are stored as a note instead,
    /// since JSON has no representation for them.
    pub fn stat(mut self, key: &str, value: f64) -> Self {
        self.set_stat(key, value);
        self
    }

    pub fn set_stat(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.statistics.insert(key.to_string(), value);
        } else {
            self.notes.push(format!("{key} = {value}"));
        }
    }

    pub fn threshold(mut self, key: &str, value: f64) -> Self {
        self.thresholds.insert(key.to_string(), value);
        self
    }

    pub fn replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let stats: Vec<String> = self
            .statistics
            .iter()
            .take(6)
            .map(|(k, v)| format!("{k}={v:.4}"))
            .collect();
        format!(
            "[{}] {} ({}): {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.test,
            self.anchor,
            stats.join(" ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let r = StatReport::new("tw-edge", "edge limit")
            .param("n", 200)
            .stat("ks", 0.0123)
            .stat("bad", f64::NAN)
            .threshold("ks_max", 0.05)
            .replicas(10)
            .seed(3)
            .pass(true);
        assert_eq!(r.notes.len(), 1);
        let back = StatReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_json().contains("\"format_version\": 1"));
        assert!(!r.to_json().contains("wall_clock"));
    }
}
