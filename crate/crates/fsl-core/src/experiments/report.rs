//! Serializable outcome of one verifier run.
//!
//! A report collects measured series, fitted exponents, inequality
//! instances, and named boolean checks, then condenses them into a
//! pass / fail / inconclusive verdict.  Inconclusive wins over fail:
//! when a measurement sits below its discretization floor, a violated
//! tolerance says nothing about the estimate being probed.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::PowerFit;

pub const REPORT_SCHEMA: &str = "report-v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

/// A measured (abscissa, value) table, e.g. (t, norm).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Least-squares exponent compared against a target value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExponentCheck {
    pub name: String,
    pub fitted: f64,
    pub stderr: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// One inequality instance lhs <= rhs * (1 + tolerance).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs / rhs, with 0/0 read as 0.
    pub ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Named boolean check with a one-line explanation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Best constant observed for an estimate that only claims "some C".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ObservedConstant {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub experiment: String,
    pub config_digest: String,
    pub seed: u64,
    pub series: Vec<Series>,
    pub exponents: Vec<ExponentCheck>,
    pub bounds: Vec<BoundCheck>,
    pub checks: Vec<Check>,
    pub constants: Vec<ObservedConstant>,
    pub notes: Vec<String>,
    /// Reasons the run cannot decide the estimate; empty when conclusive.
    pub inconclusive: Vec<String>,
    pub verdict: Verdict,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config_digest: &str, seed: u64) -> Self {
        ExperimentReport {
            schema: REPORT_SCHEMA.to_string(),
            experiment: experiment.to_string(),
            config_digest: config_digest.to_string(),
            seed,
            series: Vec::new(),
            exponents: Vec::new(),
            bounds: Vec::new(),
            checks: Vec::new(),
            constants: Vec::new(),
            notes: Vec::new(),
            inconclusive: Vec::new(),
            verdict: Verdict::Pass,
            runtime_seconds: 0.0,
        }
    }

    pub fn add_series(&mut self, name: &str, points: Vec<(f64, f64)>) {
        self.series.push(Series { name: name.to_string(), points });
    }

    pub fn record_exponent(&mut self, name: &str, fit: &PowerFit, expected: f64, tolerance: f64) -> bool {
        let pass = (fit.exponent - expected).abs() <= tolerance;
        self.exponents.push(ExponentCheck {
            name: name.to_string(),
            fitted: fit.exponent,
            stderr: fit.stderr,
            expected,
            tolerance,
            pass,
        });
        pass
    }

    /// Checks lhs <= rhs (1 + tolerance) with a tiny absolute slack so
    /// that the degenerate 0 <= 0 instance passes.
    pub fn record_bound(&mut self, name: &str, lhs: f64, rhs: f64, tolerance: f64) -> bool {
        let pass = lhs <= rhs * (1.0 + tolerance) + 1e-12;
        let ratio = if rhs != 0.0 {
            lhs / rhs
        } else if lhs == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        self.bounds.push(BoundCheck { name: name.to_string(), lhs, rhs, ratio, tolerance, pass });
        pass
    }

    pub fn record_check(&mut self, name: &str, pass: bool, detail: String) -> bool {
        self.checks.push(Check { name: name.to_string(), pass, detail });
        pass
    }

    pub fn record_constant(&mut self, name: &str, value: f64) {
        self.constants.push(ObservedConstant { name: name.to_string(), value });
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn mark_inconclusive(&mut self, reason: impl Into<String>) {
        self.inconclusive.push(reason.into());
    }

    /// Worst inequality ratio recorded so far (0 when none).
    pub fn worst_bound_ratio(&self) -> f64 {
        self.bounds.iter().map(|b| b.ratio).fold(0.0, f64::max)
    }

    /// Computes the verdict from everything recorded.
    pub fn finalize(&mut self) {
        let failed = self.exponents.iter().any(|e| !e.pass)
            || self.bounds.iter().any(|b| !b.pass)
            || self.checks.iter().any(|c| !c.pass);
        self.verdict = if !self.inconclusive.is_empty() {
            Verdict::Inconclusive
        } else if failed {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("report serialization: {e}")))
    }

    /// JSON with the runtime zeroed; equal bytes for equal runs.
    pub fn to_json_deterministic(&self) -> Result<String> {
        let mut clone = self.clone();
        clone.runtime_seconds = 0.0;
        clone.to_json()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_json()?.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: ExperimentReport =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("report parse: {e}")))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Config(format!("unsupported report schema {}", report.schema)));
        }
        Ok(report)
    }

    /// One row per recorded item, for the run directory's summary table.
    pub fn write_summary_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "kind,name,value,expected,tolerance,pass")?;
        for e in &self.exponents {
            writeln!(
                file,
                "exponent,{},{:.6e},{:.6e},{:.6e},{}",
                csv_field(&e.name),
                e.fitted,
                e.expected,
                e.tolerance,
                e.pass
            )?;
        }
        for b in &self.bounds {
            writeln!(
                file,
                "bound,{},{:.6e},{:.6e},{:.6e},{}",
                csv_field(&b.name),
                b.ratio,
                1.0,
                b.tolerance,
                b.pass
            )?;
        }
        for c in &self.checks {
            writeln!(file, "check,{},,,,{}", csv_field(&c.name), c.pass)?;
        }
        for k in &self.constants {
            writeln!(file, "constant,{},{:.6e},,,", csv_field(&k.name), k.value)?;
        }
        writeln!(file, "verdict,overall,,,,{:?}", self.verdict)?;
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    s.replace(',', ";")
}

/// Writes a series as two-column plain text, one sample per line.
pub fn write_series_dat(series: &Series, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "# {}", series.name)?;
    for (x, y) in &series.points {
        writeln!(file, "{x:.12e} {y:.12e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(exp: f64) -> PowerFit {
        PowerFit { exponent: exp, stderr: 0.01, prefactor: 1.0, residual: 0.0 }
    }

    #[test]
    fn verdict_precedence() {
        let mut r = ExperimentReport::new("demo", "abc", 1);
        r.record_exponent("slope", &fit(-1.02), -1.0, 0.15);
        r.finalize();
        assert_eq!(r.verdict, Verdict::Pass);

        r.record_bound("bad", 2.0, 1.0, 1e-3);
        r.finalize();
        assert_eq!(r.verdict, Verdict::Fail);

        r.mark_inconclusive("below discretization floor");
        r.finalize();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert_eq!(r.verdict.exit_code(), 2);
    }

    #[test]
    fn zero_over_zero_bound_passes() {
        let mut r = ExperimentReport::new("demo", "abc", 1);
        assert!(r.record_bound("trivial", 0.0, 0.0, 1e-3));
        assert_eq!(r.bounds[0].ratio, 0.0);
    }

    #[test]
    fn json_roundtrip_and_determinism() {
        let mut r = ExperimentReport::new("demo", "abc", 7);
        r.add_series("norm", vec![(1.0, 0.5), (2.0, 0.25)]);
        r.record_exponent("slope", &fit(-1.0), -1.0, 0.1);
        r.finalize();
        r.runtime_seconds = 12.5;
        let text = r.to_json().unwrap();
        let back = ExperimentReport::from_json(&text).unwrap();
        assert_eq!(back.series[0].points, r.series[0].points);
        assert_eq!(back.runtime_seconds, 12.5);

        let mut other = r.clone();
        other.runtime_seconds = 99.0;
        assert_eq!(r.to_json_deterministic().unwrap(), other.to_json_deterministic().unwrap());
    }

    #[test]
    fn schema_is_checked() {
        let mut r = ExperimentReport::new("demo", "abc", 1);
        r.schema = "report-v0".into();
        let text = serde_json::to_string(&r).unwrap();
        assert!(ExperimentReport::from_json(&text).is_err());
    }
}
