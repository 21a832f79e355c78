//! Verification reports.
//!
//! A report holds per-sample records and a list of checks. Each check names a
//! sample quantity (`"ratio"` or a metric key) and a bound; its worst value
//! and verdict are recomputed from the samples by [`VerificationReport::finalize`],
//! so `pass` is always a pure function of the per-sample data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Modulars below this are treated as zero input and excluded from ratios.
pub const DEGENERATE_MODULAR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub p_phi: f64,
    pub q_phi: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub metrics: BTreeMap<String, f64>,
}

impl SampleRecord {
    /// Ratio lhs/rhs unless rhs is below [`DEGENERATE_MODULAR`].
    pub fn new(index: usize, label: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let degenerate = !(rhs >= DEGENERATE_MODULAR) || !lhs.is_finite();
        let ratio = if degenerate { None } else { Some(lhs / rhs) };
        Self { index, label: label.into(), lhs, rhs, ratio, degenerate, metrics: BTreeMap::new() }
    }

    /// Records a metric; non-finite values are dropped.
    pub fn metric(mut self, key: &str, value: f64) -> Self {
        if value.is_finite() {
            self.metrics.insert(key.to_string(), value);
        }
        self
    }

    pub fn value_of(&self, key: &str) -> Option<f64> {
        if key == "ratio" {
            self.ratio
        } else if key == "inverse_ratio" {
            self.ratio.filter(|r| *r > 0.0).map(|r| 1.0 / r)
        } else {
            self.metrics.get(key).copied()
        }
    }
}

/// Asserted inequality `quantity ≤ bound` on every non-degenerate sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub quantity: String,
    pub bound: f64,
    pub worst: Option<f64>,
    pub holds: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, quantity: impl Into<String>, bound: f64) -> Self {
        Self { name: name.into(), quantity: quantity.into(), bound, worst: None, holds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub degenerate: usize,
    pub min_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    /// max of rhs/lhs, the constant of the reverse inequality.
    pub max_inverse_ratio: Option<f64>,
    /// Certified or analytic bound the ratios are compared with, if any.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality: String,
    pub regime: Regime,
    pub samples: Vec<SampleRecord>,
    pub aggregate: Aggregate,
    pub checks: Vec<Check>,
    pub findings: Vec<String>,
    pub pass: Option<bool>,
    pub config: serde_json::Value,
}

impl VerificationReport {
    pub fn new(inequality: impl Into<String>, regime: Regime, config: serde_json::Value) -> Self {
        Self {
            inequality: inequality.into(),
            regime,
            samples: Vec::new(),
            aggregate: aggregate_of(&[], None),
            checks: Vec::new(),
            findings: Vec::new(),
            pass: None,
            config,
        }
    }

    /// Recomputes aggregates, check verdicts and `pass` from the samples.
    pub fn finalize(&mut self) {
        self.aggregate = aggregate_of(&self.samples, self.aggregate.bound);
        for check in &mut self.checks {
            let (worst, holds) = evaluate_check(&self.samples, &check.quantity, check.bound);
            check.worst = worst;
            check.holds = holds;
        }
        self.pass = if self.checks.is_empty() { None } else { Some(self.checks.iter().all(|c| c.holds)) };
    }

    /// True when recomputing from the samples gives the stored verdicts.
    pub fn is_consistent(&self) -> bool {
        let mut copy = self.clone();
        copy.finalize();
        copy == *self
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.samples.iter().filter_map(|s| s.ratio).collect()
    }
}

fn evaluate_check(samples: &[SampleRecord], quantity: &str, bound: f64) -> (Option<f64>, bool) {
    let mut worst: Option<f64> = None;
    let mut missing = false;
    for s in samples.iter().filter(|s| !s.degenerate) {
        match s.value_of(quantity) {
            Some(v) => worst = Some(worst.map_or(v, |w| w.max(v))),
            None => missing = true,
        }
    }
    let holds = !missing && worst.is_none_or(|w| w <= bound);
    (worst, holds)
}

pub fn aggregate_of(samples: &[SampleRecord], bound: Option<f64>) -> Aggregate {
    let mut ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = if ratios.is_empty() {
        None
    } else if ratios.len() % 2 == 1 {
        Some(ratios[ratios.len() / 2])
    } else {
        let m = ratios.len() / 2;
        Some(0.5 * (ratios[m - 1] + ratios[m]))
    };
    Aggregate {
        count: samples.len(),
        degenerate: samples.iter().filter(|s| s.degenerate).count(),
        min_ratio: ratios.first().copied(),
        median_ratio: median,
        max_ratio: ratios.last().copied(),
        max_inverse_ratio: ratios.iter().filter(|r| **r > 0.0).map(|r| 1.0 / r).reduce(f64::max),
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regime() -> Regime {
        Regime { p_phi: 2.0, q_phi: 2.0, label: "test".into() }
    }

    #[test]
    fn degenerate_samples_are_excluded() {
        let s = SampleRecord::new(0, "x", 0.0, 0.0);
        assert!(s.degenerate && s.ratio.is_none());
        let s = SampleRecord::new(0, "x", 1.0, 1e-15);
        assert!(s.degenerate);
        let s = SampleRecord::new(0, "x", 2.0, 4.0);
        assert_eq!(s.ratio, Some(0.5));
    }

    #[test]
    fn aggregates_and_checks() {
        let mut r = VerificationReport::new("demo", regime(), serde_json::Value::Null);
        for (i, (a, b)) in [(1.0, 1.0), (3.0, 1.0), (2.0, 1.0), (0.0, 0.0)].iter().enumerate() {
            r.samples.push(SampleRecord::new(i, "x", *a, *b).metric("extra", *a));
        }
        r.checks.push(Check::new("ratio below 2.5", "ratio", 2.5));
        r.finalize();
        assert_eq!(r.aggregate.count, 4);
        assert_eq!(r.aggregate.degenerate, 1);
        assert_eq!(r.aggregate.median_ratio, Some(2.0));
        assert_eq!(r.aggregate.max_inverse_ratio, Some(1.0));
        assert_eq!(r.checks[0].worst, Some(3.0));
        assert_eq!(r.pass, Some(false));
        r.checks[0].bound = 3.0;
        r.finalize();
        assert_eq!(r.pass, Some(true));
        assert!(r.is_consistent());
        r.pass = Some(false);
        assert!(!r.is_consistent());
    }

    #[test]
    fn no_checks_means_findings_only() {
        let mut r = VerificationReport::new("demo", regime(), serde_json::Value::Null);
        r.samples.push(SampleRecord::new(0, "x", 1.0, 2.0));
        r.finalize();
        assert_eq!(r.pass, None);
    }

    #[test]
    fn json_round_trip() {
        let mut r = VerificationReport::new("demo", regime(), serde_json::json!({"seed": 3}));
        r.samples.push(SampleRecord::new(0, "x", 0.1 + 0.2, 3.0f64.sqrt()).metric("m", 1e-300));
        r.checks.push(Check::new("c", "m", 1.0));
        r.finalize();
        let s = serde_json::to_string(&r).unwrap();
        let back: VerificationReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
