use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::{json, Map, Number, Value};

use crate::error::{Error, Result};

/// One `(law, estimator, delta, metric)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub law: String,
    pub estimator: String,
    pub delta: f64,
    pub tau: Option<f64>,
    pub k: Option<usize>,
    pub b: Option<usize>,
    pub metric_name: String,
    pub value: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// Rows of one experiment plus provenance.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub experiment: String,
    pub kind: String,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<ReportRow>,
    /// Human-readable notes, e.g. why a cell is infeasible.
    pub notes: Vec<String>,
}

impl ExperimentReport {
    /// Rows matching `law`, `estimator` and `metric_name`.
    pub fn find<'a>(
        &'a self,
        law: &'a str,
        estimator: &'a str,
        metric: &'a str,
    ) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.law == law && r.estimator == estimator && r.metric_name == metric)
    }

    /// The single value of a `(law, estimator, metric)` cell, if unique.
    pub fn value(&self, law: &str, estimator: &str, metric: &str) -> Option<f64> {
        let mut it = self.find(law, estimator, metric);
        let first = it.next()?;
        it.next().is_none().then_some(first.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown format '{other}' (csv or json)"))),
        }
    }
}

pub const CSV_HEADER: [&str; 10] = [
    "law",
    "estimator",
    "delta",
    "tau",
    "K",
    "B",
    "metric_name",
    "value",
    "stderr",
    "seed",
];

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn to_csv(report: &ExperimentReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::parse("csv", e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in &report.rows {
        w.write_record([
            r.law.clone(),
            r.estimator.clone(),
            fmt_float(r.delta),
            opt(r.tau.map(fmt_float)),
            opt(r.k),
            opt(r.b),
            r.metric_name.clone(),
            fmt_float(r.value),
            fmt_float(r.stderr),
            r.seed.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::parse("csv", e.to_string()))
}

/// A JSON number with 17 significant digits, or `null` when not finite.
fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&fmt_float(x)).expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

pub fn to_json(report: &ExperimentReport) -> Result<Vec<u8>> {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("law".into(), json!(r.law));
            m.insert("estimator".into(), json!(r.estimator));
            m.insert("delta".into(), num(r.delta));
            m.insert("tau".into(), r.tau.map_or(Value::Null, num));
            m.insert("K".into(), json!(r.k));
            m.insert("B".into(), json!(r.b));
            m.insert("metric_name".into(), json!(r.metric_name));
            m.insert("value".into(), num(r.value));
            m.insert("stderr".into(), num(r.stderr));
            m.insert("seed".into(), json!(r.seed));
            Value::Object(m)
        })
        .collect();
    let doc = json!({
        "experiment": report.experiment,
        "kind": report.kind,
        "n": report.n,
        "replications": report.replications,
        "seed": report.seed,
        "config_hash": report.config_hash,
        "notes": report.notes,
        "rows": rows,
    });
    let mut out = serde_json::to_vec_pretty(&doc).map_err(|e| Error::parse("json", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Write `report` to `path`; the bytes depend only on the report.
pub fn write_report(report: &ExperimentReport, path: &Path, format: ReportFormat) -> Result<()> {
    let bytes = match format {
        ReportFormat::Csv => to_csv(report)?,
        ReportFormat::Json => to_json(report)?,
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            law: "normal".into(),
            estimator: "mom".into(),
            delta: 0.001,
            tau: None,
            k: Some(7),
            b: Some(142),
            metric_name: "quadratic_risk".into(),
            value: 0.1,
            stderr: f64::NAN,
            seed: 5,
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let text = String::from_utf8(to_csv(&ExperimentReport::default()).unwrap()).unwrap();
        assert_eq!(
            text,
            "law,estimator,delta,tau,K,B,metric_name,value,stderr,seed\n"
        );
    }

    #[test]
    fn one_cell_one_row() {
        let rep = ExperimentReport {
            rows: vec![row()],
            ..Default::default()
        };
        let text = String::from_utf8(to_csv(&rep).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[1],
            "normal,mom,1.0000000000000000e-3,,7,142,quadratic_risk,1.0000000000000001e-1,NaN,5"
        );
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_uses_17_digits_and_null() {
        let rep = ExperimentReport {
            rows: vec![row()],
            config_hash: "abc".into(),
            ..Default::default()
        };
        let text = String::from_utf8(to_json(&rep).unwrap()).unwrap();
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"stderr\": null"));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["config_hash"], "abc");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_report(
            &ExperimentReport::default(),
            Path::new("/nonexistent-dir/x.csv"),
            ReportFormat::Csv,
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }
}
