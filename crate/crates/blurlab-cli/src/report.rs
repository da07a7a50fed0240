//! Report assembly and serialisation (JSON plus a flat CSV of records).

use std::path::Path;

use serde::{Deserialize, Serialize};

use blurlab::report::{extended_f64, Bracket, CheckRecord, Tally, Verdict};
use blurlab::Tolerances;

use crate::config::{params_as_flags, ExperimentConfig};

/// One check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub verdict: Verdict,
    #[serde(with = "extended_f64")]
    pub lhs: f64,
    #[serde(with = "extended_f64")]
    pub rhs: f64,
    /// `rhs - lhs` for inequality checks.
    #[serde(with = "extended_f64")]
    pub slack: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<String>,
    #[serde(default)]
    pub detail: String,
    /// Wall-clock milliseconds; excluded from the CSV.
    #[serde(default)]
    pub runtime_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<String>,
}

impl Record {
    pub fn new(name: impl Into<String>, verdict: Verdict, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            verdict,
            lhs,
            rhs,
            slack: rhs - lhs,
            certificate: None,
            detail: String::new(),
            runtime_ms: 0.0,
            reproduce: None,
        }
    }

    /// `lhs <= rhs + tol`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = if lhs <= rhs + tol || rhs == f64::INFINITY { Verdict::Pass } else { Verdict::Fail };
        Self::new(name, verdict, lhs, rhs)
    }

    /// `|lhs - rhs| <= tol`.
    pub fn close(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = if (lhs - rhs).abs() <= tol { Verdict::Pass } else { Verdict::Fail };
        let mut r = Self::new(name, verdict, lhs, rhs);
        r.slack = tol - (lhs - rhs).abs();
        r
    }

    /// Aggregate of many scalar checks: `worst` residual against `tol`.
    pub fn sweep(name: impl Into<String>, worst: f64, tol: f64, cases: usize, violations: usize) -> Self {
        let verdict = if violations == 0 { Verdict::Pass } else { Verdict::Fail };
        Self::new(name, verdict, worst, tol).detail(format!("{cases} cases, {violations} violations"))
    }

    pub fn bracketed(name: impl Into<String>, verdict: Verdict, lhs: Bracket, rhs: Bracket) -> Self {
        Self::new(name, verdict, lhs.hi, rhs.lo)
            .certificate(format!("lhs in [{:.9e}, {:.9e}], rhs in [{:.9e}, {:.9e}]", lhs.lo, lhs.hi, rhs.lo, rhs.hi))
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }

    pub fn certificate(mut self, c: impl Into<String>) -> Self {
        self.certificate = Some(c.into());
        self
    }

    pub fn with_verdict(mut self, v: Verdict) -> Self {
        self.verdict = v;
        self
    }
}

impl From<CheckRecord> for Record {
    fn from(c: CheckRecord) -> Self {
        Record::new(c.name, c.verdict, c.lhs, c.rhs).detail(c.detail)
    }
}

/// Environment fingerprint attached to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub seed: u64,
    pub version: String,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub fingerprint: Fingerprint,
    pub tally: Tally,
    pub records: Vec<Record>,
    /// Command line that regenerates this report.
    pub reproduce: String,
    #[serde(default)]
    pub runtime_ms: f64,
}

/// `blurlab <experiment> --seed S [--tol T] [flags...]`.
pub fn reproduction_command(cfg: &ExperimentConfig) -> String {
    let mut parts = vec!["blurlab".to_string(), cfg.experiment.clone(), "--seed".into(), cfg.seed.to_string()];
    if let Some(t) = cfg.tol {
        parts.push("--tol".into());
        parts.push(t.to_string());
    }
    parts.extend(params_as_flags(&cfg.params));
    if let Some(p) = &cfg.inputs.state {
        parts.push("--state".into());
        parts.push(p.display().to_string());
    }
    if let Some(p) = &cfg.inputs.family {
        parts.push("--family".into());
        parts.push(p.display().to_string());
    }
    parts.join(" ")
}

impl Report {
    pub fn assemble(cfg: &ExperimentConfig, mut records: Vec<Record>, runtime_ms: f64) -> Self {
        let reproduce = reproduction_command(cfg);
        for r in &mut records {
            if r.verdict == Verdict::Fail {
                r.reproduce = Some(reproduce.clone());
            }
        }
        Report {
            experiment: cfg.experiment.clone(),
            config: cfg.clone(),
            fingerprint: Fingerprint {
                seed: cfg.seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
                tolerances: blurlab::tolerances(),
                tol: cfg.tol,
            },
            tally: Tally::from_verdicts(records.iter().map(|r| r.verdict)),
            records,
            reproduce,
            runtime_ms,
        }
    }

    pub fn failed(&self) -> bool {
        self.tally.fail > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Per-record rows without runtimes, so reruns compare byte for byte.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "name", "verdict", "lhs", "rhs", "slack", "certificate", "detail"])
            .expect("in-memory write");
        for r in &self.records {
            let verdict = serde_json::to_value(r.verdict).expect("verdict").as_str().unwrap_or("").to_string();
            w.write_record([
                self.experiment.as_str(),
                &r.name,
                &verdict,
                &format!("{:e}", r.lhs),
                &format!("{:e}", r.rhs),
                &format!("{:e}", r.slack),
                r.certificate.as_deref().unwrap_or(""),
                &r.detail,
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.json", self.experiment)), self.to_json())?;
        std::fs::write(dir.join(format!("{}.csv", self.experiment)), self.to_csv())
    }

    /// One line per record plus a tally line.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let tag = match r.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Inconclusive => "INCONCLUSIVE",
                Verdict::Inapplicable => "N/A",
            };
            s.push_str(&format!("{tag:<12} {}  lhs={:.6e} rhs={:.6e}", r.name, r.lhs, r.rhs));
            if !r.detail.is_empty() {
                s.push_str(&format!("  ({})", r.detail));
            }
            s.push('\n');
        }
        let t = &self.tally;
        s.push_str(&format!(
            "{}: {} pass, {} fail, {} inconclusive, {} inapplicable\n",
            self.experiment, t.pass, t.fail, t.inconclusive, t.inapplicable
        ));
        if self.failed() {
            s.push_str(&format!("reproduce: {}\n", self.reproduce));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failures_carry_reproduction() {
        let mut cfg = ExperimentConfig::new("axioms");
        cfg.seed = 3;
        let rep = Report::assemble(&cfg, vec![Record::le("a", 1.0, 0.0, 0.0), Record::le("b", 0.0, 1.0, 0.0)], 0.0);
        assert_eq!(rep.tally.fail, 1);
        assert_eq!(rep.records[0].reproduce.as_deref(), Some("blurlab axioms --seed 3"));
        assert!(rep.records[1].reproduce.is_none());
        let csv = rep.to_csv();
        assert_eq!(csv.lines().count(), 3);
        let back: Report = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn infinite_values_survive_json() {
        let cfg = ExperimentConfig::new("axioms");
        let rep = Report::assemble(&cfg, vec![Record::le("inf", 1.0, f64::INFINITY, 0.0)], 0.0);
        let back: Report = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(back.records[0].rhs, f64::INFINITY);
        assert_eq!(back.records[0].verdict, Verdict::Pass);
    }
}
