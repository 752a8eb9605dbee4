//! The JSON/CSV report envelope shared by every command.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stated at the top of every report.
pub const HEADER: &str = "sampled numerical evidence at desk scale (finite sections, seeded samples); not a proof";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value ≤ tol`
    AtMost,
    /// `value ≥ tol`
    AtLeast,
    /// `value > tol`
    Above,
}

impl Comparison {
    pub fn holds(self, value: f64, tol: f64) -> bool {
        match self {
            Comparison::AtMost => value <= tol,
            Comparison::AtLeast => value >= tol,
            Comparison::Above => value > tol,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
            Comparison::Above => ">",
        }
    }
}

/// One named quantity judged against a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tol,
            comparison,
            passed: comparison.holds(value, tol),
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, tol)
    }

    pub fn at_least(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, tol)
    }

    /// A yes/no outcome as `1 ≥ 1` or `0 ≥ 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub header: String,
    pub generator: String,
    pub config: serde_json::Value,
    pub result: serde_json::Value,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Report {
    pub fn new(command: &str, config: serde_json::Value, result: serde_json::Value, checks: Vec<Check>) -> Self {
        Self {
            schema: crate::SCHEMA.to_string(),
            command: command.to_string(),
            header: HEADER.to_string(),
            generator: crate::sampling::GENERATOR.to_string(),
            config,
            result,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// One row per check.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
        w.write_record(["command", "check", "value", "comparison", "tol", "passed"]).map_err(io)?;
        for c in &self.checks {
            w.write_record([
                self.command.as_str(),
                c.name.as_str(),
                &format!("{:?}", c.value),
                c.comparison.symbol(),
                &format!("{:?}", c.tol),
                if c.passed { "true" } else { "false" },
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory csv");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}
