//! Residual reports and their serializations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::spec::{CheckKind, ModeSpec, Scenario};
use crate::integrate::fmt_float;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub kind: CheckKind,
    pub mode: ModeSpec,
    pub tolerance: f64,
    pub samples: usize,
    pub skipped: usize,
    pub max_norm: Option<f64>,
    pub mean_norm: Option<f64>,
    pub worst_point: Option<Vec<f64>>,
    pub passed: bool,
    /// First failure in sample order.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetric {
    pub metric: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub name: String,
    pub steps: usize,
    pub metrics: Vec<TrajectoryMetric>,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub schema_version: u32,
    pub scenario: String,
    /// sha256 of the scenario's canonical JSON form.
    pub scenario_digest: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
    pub trajectories: Vec<TrajectoryReport>,
    /// sha256 of this report's JSON with `digest` empty.
    pub digest: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn scenario_digest(scenario: &Scenario) -> String {
    sha256_hex(&serde_json::to_vec(scenario).expect("scenario serializes"))
}

impl ResidualReport {
    pub fn compute_digest(&self) -> String {
        let mut copy = self.clone();
        copy.digest.clear();
        sha256_hex(copy.to_json().as_bytes())
    }

    /// Canonical JSON: fields in declaration order, two-space indentation and
    /// every float written with 17 significant digits.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        write_canonical(&mut out, &value, 0);
        out.push('\n');
        out
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// One row per check and per trajectory metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,name,item,samples,value,mean,tolerance,passed,error\n");
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "check,{},{},{},{},{},{},{},{}",
                csv_field(&c.name),
                c.kind.name(),
                c.samples,
                opt(c.max_norm),
                opt(c.mean_norm),
                fmt_float(c.tolerance),
                c.passed,
                csv_field(c.error.as_deref().unwrap_or("")),
            );
        }
        for t in &self.trajectories {
            if t.metrics.is_empty() {
                let _ = writeln!(
                    out,
                    "trajectory,{},,{},,,,{},{}",
                    csv_field(&t.name),
                    t.steps,
                    t.passed,
                    csv_field(t.error.as_deref().unwrap_or(""))
                );
            }
            for m in &t.metrics {
                let _ = writeln!(
                    out,
                    "trajectory,{},{},{},{},,{},{},{}",
                    csv_field(&t.name),
                    m.metric,
                    t.steps,
                    fmt_float(m.value),
                    opt(m.tolerance),
                    m.passed && t.error.is_none(),
                    csv_field(t.error.as_deref().unwrap_or("")),
                );
            }
        }
        out
    }

    /// Human-readable summary, one line per check and trajectory metric.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mark = |p: bool| if p { "PASS" } else { "FAIL" };
        for c in &self.checks {
            let value = c.max_norm.map(|v| format!("{v:.3e}")).unwrap_or_else(|| "-".into());
            let _ = write!(
                out,
                "{} check {:<28} max {:>10} tol {:.1e} ({} samples)",
                mark(c.passed),
                c.name,
                value,
                c.tolerance,
                c.samples
            );
            if let Some(e) = &c.error {
                let _ = write!(out, " error: {e}");
            }
            out.push('\n');
        }
        for t in &self.trajectories {
            for m in &t.metrics {
                let tol = m.tolerance.map(|v| format!("{v:.1e}")).unwrap_or_else(|| "-".into());
                let _ = writeln!(
                    out,
                    "{} trajectory {}/{:<20} {:.3e} tol {tol}",
                    mark(m.passed),
                    t.name,
                    m.metric,
                    m.value
                );
            }
            if let Some(e) = &t.error {
                let _ = writeln!(out, "FAIL trajectory {} error: {e}", t.name);
            }
        }
        let _ = writeln!(
            out,
            "{}: {} ({})",
            self.scenario,
            if self.passed { "all checks passed" } else { "FAILED" },
            self.digest
        );
        out
    }
}

fn write_canonical(out: &mut String, v: &serde_json::Value, depth: usize) {
    use serde_json::Value;
    let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => out.push_str(&fmt_float(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, depth + 1);
                write_canonical(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_canonical(out, item, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
