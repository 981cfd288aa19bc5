//! Verification reports and their JSON/CSV serialization.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;

pub const CSV_HEADER: [&str; 5] = ["grid-var", "value", "bound", "scaled-value", "verdict"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Inequality,
    Monotone,
    Convexity,
    Equality,
    Convergence,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "n/a",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub grid: f64,
    pub value: f64,
    pub bound: Option<f64>,
    pub scaled: Option<f64>,
    pub verdict: Verdict,
}

impl SeriesRow {
    pub fn new(grid: f64, value: f64) -> Self {
        SeriesRow {
            grid,
            value,
            bound: None,
            scaled: None,
            verdict: Verdict::NotApplicable,
        }
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.scaled = Some(s);
        self
    }

    pub fn verdict(mut self, ok: bool) -> Self {
        self.verdict = Verdict::from_bool(ok);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    /// Name of the grid variable, e.g. `t`.
    pub grid_var: String,
    pub rows: Vec<SeriesRow>,
}

impl Series {
    pub fn new(name: impl Into<String>, grid_var: impl Into<String>) -> Self {
        Series {
            name: name.into(),
            grid_var: grid_var.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: SeriesRow) {
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                fmt_num(r.grid),
                fmt_num(r.value),
                r.bound.map(fmt_num).unwrap_or_default(),
                r.scaled.map(fmt_num).unwrap_or_default(),
                r.verdict.as_str().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub parameter: f64,
    pub value: f64,
    /// Change from the previous row.
    pub change: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub name: String,
    pub parameter: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn new(name: impl Into<String>, parameter: impl Into<String>, points: &[(f64, f64)]) -> Self {
        let rows = points
            .iter()
            .enumerate()
            .map(|(i, &(parameter, value))| ConvergenceRow {
                parameter,
                value,
                change: (i > 0).then(|| value - points[i - 1].1),
            })
            .collect();
        ConvergenceTable {
            name: name.into(),
            parameter: parameter.into(),
            rows,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
    pub convergence: Vec<ConvergenceTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectra: Option<serde_json::Value>,
    pub metrics: BTreeMap<String, serde_json::Value>,
    pub wall_clock_seconds: f64,
    pub config: serde_json::Value,
}

impl VerificationReport {
    pub fn new(experiment: &str) -> Self {
        VerificationReport {
            experiment: experiment.to_string(),
            passed: true,
            checks: Vec::new(),
            series: Vec::new(),
            convergence: Vec::new(),
            spectra: None,
            metrics: BTreeMap::new(),
            wall_clock_seconds: 0.0,
            config: serde_json::Value::Null,
        }
    }

    pub fn push_check(&mut self, check: Check) -> bool {
        let ok = check.passed;
        self.passed &= ok;
        self.checks.push(check);
        ok
    }

    /// `lhs ≤ rhs (1 + tol)`, relative to `|rhs|`.
    pub fn check_le(&mut self, name: &str, claim: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let passed = lhs <= rhs + tol * rhs.abs();
        self.push_check(Check {
            name: name.into(),
            kind: CheckKind::Inequality,
            claim: claim.into(),
            lhs,
            rhs,
            tolerance: tol,
            passed,
            detail: None,
        })
    }

    /// `|lhs − rhs| ≤ tol |rhs|`.
    pub fn check_close(&mut self, name: &str, claim: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let passed = (lhs - rhs).abs() <= tol * rhs.abs();
        self.push_check(Check {
            name: name.into(),
            kind: CheckKind::Equality,
            claim: claim.into(),
            lhs,
            rhs,
            tolerance: tol,
            passed,
            detail: Some(format!("relative error {:e}", rel_err(lhs, rhs))),
        })
    }

    /// `|lhs − rhs| ≤ tol`.
    pub fn check_abs(&mut self, name: &str, claim: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let passed = (lhs - rhs).abs() <= tol;
        self.push_check(Check {
            name: name.into(),
            kind: CheckKind::Convergence,
            claim: claim.into(),
            lhs,
            rhs,
            tolerance: tol,
            passed,
            detail: Some(format!("absolute error {:e}", (lhs - rhs).abs())),
        })
    }

    /// Records a sequence check; `lhs` is the worst violation, `rhs` is 0.
    pub fn check_sequence(
        &mut self,
        name: &str,
        kind: CheckKind,
        claim: &str,
        worst: f64,
        tol: f64,
        detail: String,
    ) -> bool {
        self.push_check(Check {
            name: name.into(),
            kind,
            claim: claim.into(),
            lhs: worst,
            rhs: 0.0,
            tolerance: tol,
            passed: worst <= tol,
            detail: Some(detail),
        })
    }

    pub fn check_exact(&mut self, name: &str, claim: &str, passed: bool, detail: String) -> bool {
        self.push_check(Check {
            name: name.into(),
            kind: CheckKind::Exact,
            claim: claim.into(),
            lhs: if passed { 1.0 } else { 0.0 },
            rhs: 1.0,
            tolerance: 0.0,
            passed,
            detail: Some(detail),
        })
    }

    pub fn metric(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metrics.insert(key.to_string(), v);
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn series_named(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json` and, for CSV output, one `<series>.csv` per series.
    pub fn write(&self, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join("report.json");
        fs::write(&path, self.to_json()? + "\n")?;
        written.push(path);
        if format == OutputFormat::Csv {
            for s in &self.series {
                let path = dir.join(format!("{}.csv", s.name));
                s.write_csv(&path)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Largest violation of `next ≤ prev + tol` along a sequence of logs.
pub fn worst_increase(logs: &[f64]) -> f64 {
    logs.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0)
}
