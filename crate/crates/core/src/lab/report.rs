//! Check verdicts and their CSV exports.
//!
//! `report.csv`: `suite,check,anchor,verdict,measured,limit,tolerance_source,detail`.
//! `constants.csv`: `suite,check,name,value`.
//! `timings.csv`: `suite,check,seconds`.
//!
//! Floats are written with ten significant digits. The first two files
//! depend only on the config and seed; wall-clock times live in the third.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use super::config::Suite;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

/// Polyline data for an optional SVG plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub lines: Vec<(String, Vec<(f64, f64)>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub check: &'static str,
    pub anchor: &'static str,
    pub verdict: Verdict,
    pub measured: f64,
    pub limit: Option<f64>,
    pub tolerance_source: String,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantRecord {
    pub check: &'static str,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub constants: Vec<ConstantRecord>,
    pub series: Vec<(&'static str, Series)>,
}

pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else {
        format!("{v}")
    }
}

#[derive(Serialize)]
struct ReportRow<'a> {
    suite: &'a str,
    check: &'a str,
    anchor: &'a str,
    verdict: Verdict,
    measured: String,
    limit: String,
    tolerance_source: &'a str,
    detail: &'a str,
}

#[derive(Serialize)]
struct ConstantRow<'a> {
    suite: &'a str,
    check: &'a str,
    name: &'a str,
    value: String,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    suite: &'a str,
    check: &'a str,
    seconds: String,
}

fn csv_err(e: csv::Error) -> LabError {
    LabError::Io(e.to_string())
}

impl ExperimentReport {
    /// True when no check failed; skipped checks do not count.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }

    pub fn report_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(ReportRow {
                suite: self.suite.name(),
                check: c.check,
                anchor: c.anchor,
                verdict: c.verdict,
                measured: fmt_num(c.measured),
                limit: c.limit.map(fmt_num).unwrap_or_default(),
                tolerance_source: &c.tolerance_source,
                detail: &c.detail,
            })
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }

    pub fn constants_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.constants {
            w.serialize(ConstantRow {
                suite: self.suite.name(),
                check: c.check,
                name: &c.name,
                value: fmt_num(c.value),
            })
            .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }

    pub fn timings_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.checks {
            w.serialize(TimingRow { suite: self.suite.name(), check: c.check, seconds: format!("{:.3}", c.seconds) })
                .map_err(csv_err)?;
        }
        w.into_inner().map_err(|e| LabError::Io(e.to_string()))
    }

    /// Writes the three CSV files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.csv"), self.report_csv()?)?;
        std::fs::write(dir.join("constants.csv"), self.constants_csv()?)?;
        std::fs::write(dir.join("timings.csv"), self.timings_csv()?)?;
        Ok(())
    }

    /// One line per check for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let limit = c.limit.map(|l| format!(" (limit {})", fmt_short(l))).unwrap_or_default();
            out += &format!(
                "{:<7} {}: {} measured {}{}  [{:.1}s]\n",
                c.verdict.to_string().to_uppercase(),
                self.suite,
                c.check,
                fmt_short(c.measured),
                limit,
                c.seconds
            );
            if c.verdict == Verdict::Fail {
                out += &format!("        {}\n", c.detail);
            }
        }
        out
    }
}

fn fmt_short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}
