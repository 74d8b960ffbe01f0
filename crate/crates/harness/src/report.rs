//! Relative errors and the report types written by `validate` and `bench`.

use serde::{Deserialize, Serialize};

/// Relative error in percent, or the plain difference when the truth is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrPct {
    pub value: f64,
    /// `value` is `truth - estimate` rather than a percentage.
    pub absolute: bool,
}

/// `(truth - estimate) / truth × 100`; an estimate above the truth gives a
/// negative error.
pub fn err_pct(truth: f64, estimate: f64) -> ErrPct {
    if truth == 0.0 {
        ErrPct { value: truth - estimate, absolute: true }
    } else {
        ErrPct { value: (truth - estimate) / truth * 100.0, absolute: false }
    }
}

/// Pass threshold for one statistic: the larger of twice a reference error
/// and five standard errors, both in the units of [`err_pct`].
pub fn tolerance(truth: f64, std_error: f64, reference_err: Option<f64>) -> f64 {
    let noise = if truth == 0.0 { 5.0 * std_error } else { 5.0 * std_error / truth.abs() * 100.0 };
    reference_err.map_or(noise, |r| noise.max(2.0 * r.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    /// Raw moment `E[X^k]`.
    Moment,
    /// Cumulant of order `k`, estimated by the k-statistic.
    Cumulant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRecord {
    pub order: u32,
    pub statistic: Statistic,
    pub truth: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub err_pct: f64,
    pub absolute_fallback: bool,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub target: String,
    pub method: String,
    pub n: usize,
    pub seed: u64,
    pub build_id: String,
    pub records: Vec<StatRecord>,
    pub pass: bool,
}

impl ValidationReport {
    /// Re-derive tolerances from reference errors, one per order, and
    /// update the pass flags.
    pub fn judge(&mut self, reference: Option<&[f64]>) {
        for (i, r) in self.records.iter_mut().enumerate() {
            let cell = reference.and_then(|c| c.get(i).copied());
            r.tolerance = tolerance(r.truth, r.std_error, cell);
            r.pass = r.err_pct.abs() <= r.tolerance;
        }
        self.pass = self.records.iter().all(|r| r.pass);
    }

    /// Replace every tolerance by a fixed `limit`.
    pub fn judge_fixed(&mut self, limit: f64) {
        for r in &mut self.records {
            r.tolerance = limit;
            r.pass = r.err_pct.abs() <= limit;
        }
        self.pass = self.records.iter().all(|r| r.pass);
    }

    pub fn worst(&self) -> Option<&StatRecord> {
        self.records.iter().max_by(|a, b| (a.err_pct.abs() / a.tolerance).total_cmp(&(b.err_pct.abs() / b.tolerance)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    pub n: usize,
    /// Median wall-clock seconds over the repetitions.
    pub seconds: f64,
    /// `seconds / baseline seconds` at the same `n`.
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub target: String,
    pub baseline: String,
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub machine: String,
    pub build_id: String,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn seconds(&self, method: &str, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.method == method && r.n == n).map(|r| r.seconds)
    }

    /// Total median time of `method` over all sizes.
    pub fn total_seconds(&self, method: &str) -> f64 {
        self.rows.iter().filter(|r| r.method == method).map(|r| r.seconds).sum()
    }
}
