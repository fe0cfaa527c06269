//! Reporting helpers for the acceptance suite: each criterion prints one
//! `PASS` or `FAIL` line with its measurements and wall time.

use std::time::Instant;

/// Result of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("criterion {}: {tag} ({:.1} s) {}", self.id, self.seconds, self.detail)
    }
}

/// Runs `check`, which returns `(pass, detail)`, and fails the criterion
/// when it errs or exceeds `budget` seconds.
pub fn judge<E: std::fmt::Display>(id: &str, budget: f64, check: impl FnOnce() -> Result<(bool, String), E>) -> Verdict {
    let start = Instant::now();
    let (pass, mut detail) = match check() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = start.elapsed().as_secs_f64();
    let on_time = seconds <= budget;
    if !on_time {
        detail.push_str(&format!("; over the {budget} s budget"));
    }
    Verdict { id: id.to_string(), pass: pass && on_time, detail, seconds }
}

/// `values` within `rel` of `target` (relative).
pub fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

/// `b[k+1] <= b[k] + slack` for all `k`.
pub fn non_increasing_within(counts: &[usize], slack: usize) -> bool {
    counts.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Strictly decreasing.
pub fn decreasing(counts: &[usize]) -> bool {
    counts.windows(2).all(|w| w[1] < w[0])
}
