//! Experiment reports: JSON for lossless storage, CSV for diffable records,
//! plain text for people.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::Estimate;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "# wegner-lab report v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Informational,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Informational => "INFORMATIONAL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// One estimate at one configuration point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    /// Configuration point, e.g. `L=8;eps=0.1`.
    pub point: String,
    pub statistic: String,
    pub value: f64,
    /// Monte Carlo standard error; absent for deterministic quantities.
    pub stderr: Option<f64>,
    pub replicas: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub records: Vec<Record>,
    pub fitted: BTreeMap<String, f64>,
    pub clauses: Vec<Clause>,
    pub seeds: Vec<u64>,
    /// Excluded from the CSV so that reruns compare byte for byte.
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: Option<u64>) -> Self {
        ExperimentReport {
            experiment: experiment.to_string(),
            config: BTreeMap::new(),
            records: Vec::new(),
            fitted: BTreeMap::new(),
            clauses: Vec::new(),
            seeds: seed.into_iter().collect(),
            wall_clock_s: 0.0,
        }
    }

    /// Copies every field of a serializable parameter set into the echo.
    pub fn echo<P: Serialize>(&mut self, params: &P) {
        if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(params) {
            for (k, v) in map {
                self.config.insert(k, v.to_string());
            }
        }
    }

    pub fn value(&mut self, point: impl Into<String>, statistic: &str, value: f64) {
        self.records.push(Record { point: point.into(), statistic: statistic.into(), value, stderr: None, replicas: None });
    }

    pub fn estimate(&mut self, point: impl Into<String>, statistic: &str, e: Estimate) {
        self.records.push(Record {
            point: point.into(),
            statistic: statistic.into(),
            value: e.mean,
            stderr: Some(e.stderr),
            replicas: Some(e.n),
        });
    }

    pub fn clause(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        self.clauses.push(Clause { name: name.into(), verdict, detail: detail.into() });
    }

    pub fn note(&mut self, name: &str, detail: impl Into<String>) {
        self.clauses.push(Clause { name: name.into(), verdict: Verdict::Informational, detail: detail.into() });
    }

    pub fn find(&self, point: &str, statistic: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.point == point && r.statistic == statistic)
    }

    /// FAIL if any clause fails, PASS if some clause passes, otherwise
    /// INFORMATIONAL.
    pub fn overall(&self) -> Verdict {
        if self.clauses.iter().any(|c| c.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.clauses.iter().any(|c| c.verdict == Verdict::Pass) {
            Verdict::Pass
        } else {
            Verdict::Informational
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// Columns: `kind,key,statistic,value,stderr,replicas,detail`, where
    /// `kind` is one of `config`, `seed`, `record`, `fitted`, `clause`,
    /// `overall`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fmt = |x: f64| format!("{x:?}");
        let mut row = |cols: [&str; 7]| w.write_record(cols).map_err(|e| Error::Format(e.to_string()));
        row(["kind", "key", "statistic", "value", "stderr", "replicas", "detail"])?;
        row(["experiment", &self.experiment, "", "", "", "", ""])?;
        for (k, v) in &self.config {
            row(["config", k, "", v, "", "", ""])?;
        }
        for s in &self.seeds {
            row(["seed", "", "", &s.to_string(), "", "", ""])?;
        }
        for r in &self.records {
            let se = r.stderr.map(fmt).unwrap_or_default();
            let n = r.replicas.map(|n| n.to_string()).unwrap_or_default();
            row(["record", &r.point, &r.statistic, &fmt(r.value), &se, &n, ""])?;
        }
        for (k, v) in &self.fitted {
            row(["fitted", k, "", &fmt(*v), "", "", ""])?;
        }
        for c in &self.clauses {
            row(["clause", &c.name, &c.verdict.to_string(), "", "", "", &c.detail])?;
        }
        row(["overall", "", &self.overall().to_string(), "", "", "", ""])?;
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        let body = String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))?;
        Ok(format!("{CSV_HEADER}\n{body}"))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.experiment);
        let _ = writeln!(s, "verdict:    {}", self.overall());
        for c in &self.clauses {
            let _ = writeln!(s, "  [{}] {}: {}", c.verdict, c.name, c.detail);
        }
        if !self.fitted.is_empty() {
            let _ = writeln!(s, "fitted:");
            for (k, v) in &self.fitted {
                let _ = writeln!(s, "  {k} = {v:.6}");
            }
        }
        let _ = writeln!(s, "records:    {}", self.records.len());
        let _ = writeln!(s, "wall clock: {:.2} s", self.wall_clock_s);
        s
    }

    /// Writes `report.json`, `report.csv` and `summary.txt` into `dir`.
    pub fn write_to(&self, dir: &std::path::Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("report.csv"), self.to_csv()?)?;
        std::fs::write(dir.join("summary.txt"), self.summary())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::stats::estimate;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", Some(42));
        r.config.insert("eps_list".into(), "[0.1,0.05,0.025]".into());
        r.estimate("L=8", "count", estimate(&[1.0, 2.0, 4.0]));
        r.value("L=8", "s", 0.1 + 0.2);
        r.fitted.insert("C_W".into(), 1.0 / 3.0);
        r.clause("trend", true, "ok, with a comma");
        r.wall_clock_s = 1.25;
        r
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        assert_eq!(ExperimentReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }

    #[test]
    fn csv_is_versioned_and_clock_free() {
        let mut r = sample();
        let a = r.to_csv().unwrap();
        assert!(a.starts_with(CSV_HEADER));
        assert!(a.contains("0.30000000000000004"));
        r.wall_clock_s = 99.0;
        assert_eq!(a, r.to_csv().unwrap());
        assert_eq!(r.overall(), Verdict::Pass);
        r.clause("other", false, "");
        assert_eq!(r.overall(), Verdict::Fail);
        let mut info = ExperimentReport::new("x", None);
        info.note("probe", "");
        assert_eq!(info.overall(), Verdict::Informational);
    }
}
