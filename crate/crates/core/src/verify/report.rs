use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Suite};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// `Some(v)` for finite `v`; non-finite values are serialized as `null`.
pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// One evaluated inequality on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub case: String,
    pub grid_n: usize,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub witness: Vec<(String, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncation: Vec<String>,
    pub pass: bool,
}

impl CaseRecord {
    /// Ratio `lhs / rhs` (0 when `lhs` vanishes); fails when anything is non-finite.
    pub fn new(case: impl Into<String>, grid_n: usize, lhs: f64, rhs: f64, pass: bool) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        let ok = lhs.is_finite() && rhs.is_finite() && ratio.is_finite();
        Self {
            case: case.into(),
            grid_n,
            lhs: finite(lhs),
            rhs: finite(rhs),
            ratio: finite(ratio),
            witness: Vec::new(),
            truncation: Vec::new(),
            pass: pass && ok,
        }
    }

    pub fn with_witness(mut self, w: Vec<(String, f64)>) -> Self {
        self.witness = w.into_iter().filter(|(_, v)| v.is_finite()).collect();
        self
    }

    pub fn with_truncation(mut self, t: Vec<String>) -> Self {
        self.truncation = t;
        self
    }
}

/// A quantity tracked across the grid sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub quantity: String,
    /// `(grid_n, value)`.
    pub values: Vec<(usize, Option<f64>)>,
    /// Largest change between consecutive grids relative to the coarser value, in percent.
    pub drift_pct: Option<f64>,
    pub within_threshold: bool,
}

impl RefinementRow {
    pub fn new(quantity: impl Into<String>, values: &[(usize, f64)], threshold_pct: f64) -> Self {
        let mut drift: f64 = 0.0;
        for w in values.windows(2) {
            let (a, b) = (w[0].1, w[1].1);
            let d = if a == b { 0.0 } else { 100.0 * (b - a).abs() / a.abs() };
            drift = drift.max(d);
        }
        let drift = if values.iter().all(|(_, v)| v.is_finite()) { drift } else { f64::NAN };
        Self {
            quantity: quantity.into(),
            values: values.iter().map(|(n, v)| (*n, finite(*v))).collect(),
            drift_pct: finite(drift),
            within_threshold: drift.is_finite() && drift < threshold_pct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Assertion {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub suite: Suite,
    pub cases: Vec<CaseRecord>,
    pub refinement: Vec<RefinementRow>,
    pub assertions: Vec<Assertion>,
    /// Truncations and other approximations made during the run.
    pub notes: Vec<String>,
    pub pass: bool,
}

impl SuiteRecord {
    pub fn new(suite: Suite) -> Self {
        Self { suite, cases: Vec::new(), refinement: Vec::new(), assertions: Vec::new(), notes: Vec::new(), pass: true }
    }

    pub fn assert(&mut self, a: Assertion) {
        self.pass &= a.pass;
        self.assertions.push(a);
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn row(&self, quantity: &str) -> Option<&RefinementRow> {
        self.refinement.iter().find(|r| r.quantity == quantity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub suites: Vec<SuiteRecord>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    suite: &'static str,
    case: &'a str,
    grid_n: usize,
    lhs: Option<f64>,
    rhs: Option<f64>,
    ratio: Option<f64>,
    pass: bool,
}

impl VerificationReport {
    pub fn new(config: ExperimentConfig, suites: Vec<SuiteRecord>) -> Self {
        let pass = suites.iter().all(|s| s.pass);
        Self { schema_version: SCHEMA_VERSION, config, suites, pass, wall_time_s: None }
    }

    pub fn suite(&self, s: Suite) -> Option<&SuiteRecord> {
        self.suites.iter().find(|r| r.suite == s)
    }

    pub fn case_count(&self) -> usize {
        self.suites.iter().map(|s| s.cases.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(s).map_err(|e| Error::ConfigInvalid(format!("report: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::ConfigInvalid(format!("unsupported schema_version {}", r.schema_version)));
        }
        Ok(r)
    }

    /// Flat rows `(suite, case, grid_n, lhs, rhs, ratio, pass)`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        if self.case_count() == 0 {
            w.write_record(["suite", "case", "grid_n", "lhs", "rhs", "ratio", "pass"]).map_err(io)?;
        }
        for s in &self.suites {
            for c in &s.cases {
                w.serialize(CsvRow {
                    suite: s.suite.name(),
                    case: &c.case,
                    grid_n: c.grid_n,
                    lhs: c.lhs,
                    rhs: c.rhs,
                    ratio: c.ratio,
                    pass: c.pass,
                })
                .map_err(io)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => self.to_csv(),
        }
    }
}

/// Writes the report to `path`.
pub fn emit_report(report: &VerificationReport, format: ReportFormat, path: &Path) -> Result<()> {
    std::fs::write(path, report.render(format)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid() {
        let mut c = ExperimentConfig::demo();
        c.suites.clear();
        let r = VerificationReport::new(c, Vec::new());
        let json = r.to_json().unwrap();
        assert_eq!(VerificationReport::from_json(&json).unwrap(), r);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 1);
    }

    #[test]
    fn drift_and_ratio() {
        let row = RefinementRow::new("q", &[(1, 1.0), (2, 1.05)], 10.0);
        assert!(row.within_threshold);
        assert!((row.drift_pct.unwrap() - 5.0).abs() < 1e-9);
        let row = RefinementRow::new("q", &[(1, 1.0), (2, f64::INFINITY)], 10.0);
        assert!(!row.within_threshold && row.drift_pct.is_none());
        let c = CaseRecord::new("c", 1, 1.0, 0.0, true);
        assert!(!c.pass && c.ratio.is_none());
        assert_eq!(CaseRecord::new("c", 1, 0.0, 0.0, true).ratio, Some(0.0));
    }
}
