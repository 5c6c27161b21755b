//! Machine-readable verification reports.
//!
//! A report is a flat list of checks, each carrying a stable id, a
//! self-contained statement of the claim it verifies (the anchor), the two
//! compared values, and the tolerance that decided pass/fail. Exact rational
//! checks carry tolerance 0. `runtime_ms` is measured wall time; consumers
//! comparing reports for determinism should normalize that one field.

use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Untestable,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub anchor: String,
    pub status: CheckStatus,
    pub lhs: Value,
    pub rhs: Value,
    pub tolerance: f64,
    pub runtime_ms: u64,
}

impl CheckRecord {
    pub fn exact(id: &str, anchor: &str, pass: bool, lhs: Value, rhs: Value) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            lhs,
            rhs,
            tolerance: 0.0,
            runtime_ms: 0,
        }
    }

    pub fn toleranced(id: &str, anchor: &str, pass: bool, lhs: Value, rhs: Value, tol: f64) -> Self {
        Self {
            tolerance: tol,
            ..Self::exact(id, anchor, pass, lhs, rhs)
        }
    }

    /// A claim with no finite-dimensional or finite-support instance; recorded
    /// so the report states explicitly what was NOT verified and why.
    pub fn untestable(id: &str, anchor: &str, reason: &str) -> Self {
        Self {
            id: id.into(),
            anchor: anchor.into(),
            status: CheckStatus::Untestable,
            lhs: json!(reason),
            rhs: Value::Null,
            tolerance: 0.0,
            runtime_ms: 0,
        }
    }

    pub fn with_runtime(mut self, ms: u64) -> Self {
        self.runtime_ms = ms;
        self
    }
}

/// Wall-clock lap timer: `ms()` reports time since the previous call.
pub(crate) struct Lap(Instant);

impl Lap {
    pub fn start() -> Self {
        Lap(Instant::now())
    }

    pub fn ms(&mut self) -> u64 {
        let now = Instant::now();
        let out = now.duration_since(self.0).as_millis() as u64;
        self.0 = now;
        out
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub untestable: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub tol: f64,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(suite: &str, seed: u64, tol: f64) -> Self {
        Self {
            schema: 1,
            suite: suite.into(),
            seed,
            tol,
            checks: Vec::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        match record.status {
            CheckStatus::Pass => self.summary.pass += 1,
            CheckStatus::Fail => self.summary.fail += 1,
            CheckStatus::Untestable => self.summary.untestable += 1,
        }
        self.checks.push(record);
    }

    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    /// Concatenate several suite reports into one (seed/tol taken from the
    /// first; ids stay unique because they are family-prefixed).
    pub fn merged(name: &str, parts: Vec<VerificationReport>) -> Self {
        let (seed, tol) = parts
            .first()
            .map(|r| (r.seed, r.tol))
            .unwrap_or((0, 0.0));
        let mut out = Self::new(name, seed, tol);
        for part in parts {
            for check in part.checks {
                out.push(check);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        fn field(s: &str) -> String {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.to_string()
            }
        }
        let mut out = String::from("id,anchor,status,lhs,rhs,tolerance,runtime_ms\n");
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "fail",
                CheckStatus::Untestable => "untestable",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                field(&c.id),
                field(&c.anchor),
                status,
                field(&c.lhs.to_string()),
                field(&c.rhs.to_string()),
                c.tolerance,
                c.runtime_ms
            );
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Suite `{}`\n\nseed {}, tolerance {:e}: **{} pass / {} fail / {} untestable**\n\n",
            self.suite, self.seed, self.tol, self.summary.pass, self.summary.fail, self.summary.untestable
        );
        out.push_str("| id | status | lhs | rhs | tolerance | claim |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "**fail**",
                CheckStatus::Untestable => "untestable",
            };
            let escape = |s: String| s.replace('|', "\\|");
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                c.id,
                status,
                escape(c.lhs.to_string()),
                escape(c.rhs.to_string()),
                c.tolerance,
                escape(c.anchor.clone())
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_tracks_pushes() {
        let mut r = VerificationReport::new("demo", 7, 1e-9);
        r.push(CheckRecord::exact("demo/a", "a = a", true, json!(1), json!(1)));
        r.push(CheckRecord::exact("demo/b", "b = b", false, json!(1), json!(2)));
        r.push(CheckRecord::untestable("demo/c", "no instance", "needs infinite dimensions"));
        assert_eq!(r.summary.pass, 1);
        assert_eq!(r.summary.fail, 1);
        assert_eq!(r.summary.untestable, 1);
        assert!(!r.passed());
    }

    #[test]
    fn csv_quotes_commas() {
        let mut r = VerificationReport::new("demo", 0, 0.0);
        r.push(CheckRecord::exact(
            "demo/q",
            "pairs (a, b) stay put",
            true,
            json!("x, y"),
            json!(0),
        ));
        let csv = r.to_csv();
        assert!(csv.contains("\"pairs (a, b) stay put\""));
        assert!(csv.lines().count() == 2);
    }

    #[test]
    fn json_schema_field_present() {
        let r = VerificationReport::new("demo", 3, 1e-8);
        let v: Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["schema"], json!(1));
        assert_eq!(v["suite"], json!("demo"));
        assert_eq!(v["seed"], json!(3));
    }
}
