use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;
use serde_json::Value;

/// Outcome of one audit. `passed` is exactly `statistic <= threshold`;
/// interval checks encode the deviation from the target as the statistic
/// and record the raw estimate and target in `details`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub passed: bool,
    pub details: BTreeMap<String, Value>,
}

impl AuditReport {
    pub fn new(test_name: impl Into<String>, statistic: f64, threshold: f64, n_samples: usize) -> Self {
        AuditReport {
            test_name: test_name.into(),
            statistic,
            threshold,
            n_samples,
            // NaN statistics fail.
            passed: statistic <= threshold,
            details: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_owned(), value.into());
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.test_name = name.into();
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report always serializes")
    }
}

/// Fixed-width table, one row per report.
pub fn summary_table(reports: &[AuditReport]) -> String {
    let width = reports
        .iter()
        .map(|r| r.test_name.len())
        .max()
        .unwrap_or(4)
        .max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>14}  {:>14}  {:>10}  result",
        "test", "statistic", "threshold", "samples"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>14.6e}  {:>14.6e}  {:>10}  {}",
            r.test_name,
            r.statistic,
            r.threshold,
            r.n_samples,
            if r.passed { "PASS" } else { "FAIL" }
        );
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} passed, {} failed", reports.len() - failed, failed);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passed_tracks_threshold() {
        assert!(AuditReport::new("a", 0.5, 0.5, 1).passed);
        assert!(!AuditReport::new("a", 0.6, 0.5, 1).passed);
        assert!(!AuditReport::new("a", f64::NAN, 0.5, 1).passed);
    }

    #[test]
    fn json_line_has_fields() {
        let line = AuditReport::new("x", 0.1, 0.2, 10).with("seed", 3).to_json_line();
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["test_name"], "x");
        assert_eq!(v["details"]["seed"], 3);
        assert_eq!(v["passed"], true);
    }

    #[test]
    fn table_counts_failures() {
        let t = summary_table(&[AuditReport::new("a", 1.0, 0.0, 1), AuditReport::new("b", 0.0, 1.0, 1)]);
        assert!(t.contains("1 passed, 1 failed"));
        assert!(t.contains("FAIL"));
    }
}
