//! Report assembly and emission. The CSV holds one row per
//! (estimator, replication) plus one aggregate row per estimator; it carries no
//! timings so that a fixed-seed run reproduces it byte for byte. Timings appear
//! only in the markdown table.

use std::path::{Path, PathBuf};

use cdnn_core::data::format_f64;

use crate::config::{EstimatorKind, MetricScope};
use crate::metrics::mean_sd;
use crate::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub sqrt_pehe: f64,
    pub eps_ate: f64,
    pub eps_ate_signed: f64,
    pub mean_abs_ite: f64,
    /// Correlation of predicted effects with the oracle effect, when known.
    pub theta_correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRow {
    pub estimator: EstimatorKind,
    pub replication: usize,
    pub outcome: std::result::Result<RowMetrics, String>,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub estimator: EstimatorKind,
    pub succeeded: usize,
    pub failed: usize,
    pub sqrt_pehe: Option<MeanSd>,
    pub eps_ate: Option<MeanSd>,
    pub eps_ate_signed: Option<f64>,
    pub mean_abs_ite: Option<f64>,
    pub mean_runtime_secs: f64,
}

impl Aggregate {
    fn from_rows(estimator: EstimatorKind, rows: &[&ReplicationRow]) -> Self {
        let ok: Vec<&RowMetrics> = rows.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
        let stat = |f: fn(&RowMetrics) -> f64| -> Option<MeanSd> {
            if ok.is_empty() {
                return None;
            }
            let values: Vec<f64> = ok.iter().map(|m| f(m)).collect();
            let (mean, sd) = mean_sd(&values);
            Some(MeanSd { mean, sd })
        };
        let runtimes: Vec<f64> = rows.iter().map(|r| r.runtime_secs).collect();
        Self {
            estimator,
            succeeded: ok.len(),
            failed: rows.len() - ok.len(),
            sqrt_pehe: stat(|m| m.sqrt_pehe),
            eps_ate: stat(|m| m.eps_ate),
            eps_ate_signed: stat(|m| m.eps_ate_signed).map(|s| s.mean),
            mean_abs_ite: stat(|m| m.mean_abs_ite).map(|s| s.mean),
            mean_runtime_secs: if runtimes.is_empty() {
                0.0
            } else {
                mean_sd(&runtimes).0
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub rows: Vec<ReplicationRow>,
    pub aggregates: Vec<Aggregate>,
    pub metrics_on: MetricScope,
}

const HEADER: [&str; 13] = [
    "kind",
    "estimator",
    "replication",
    "sqrt_pehe",
    "eps_ate",
    "eps_ate_signed",
    "mean_abs_ite",
    "theta_corr",
    "sqrt_pehe_sd",
    "eps_ate_sd",
    "succeeded",
    "failed",
    "status",
];

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// `mean±sd` with two decimals, or three when either part is below 0.1.
pub fn format_cell(stat: MeanSd) -> String {
    let digits = if stat.mean.abs() < 0.1 || stat.sd < 0.1 { 3 } else { 2 };
    format!("{:.*}±{:.*}", digits, stat.mean, digits, stat.sd)
}

impl MetricsReport {
    /// Aggregates rows per estimator, keeping the order of `estimators`.
    pub fn from_rows(
        rows: Vec<ReplicationRow>,
        estimators: &[EstimatorKind],
        metrics_on: MetricScope,
    ) -> Self {
        let aggregates = estimators
            .iter()
            .map(|&e| {
                let mine: Vec<&ReplicationRow> = rows.iter().filter(|r| r.estimator == e).collect();
                Aggregate::from_rows(e, &mine)
            })
            .collect();
        Self {
            rows,
            aggregates,
            metrics_on,
        }
    }

    pub fn aggregate(&self, estimator: EstimatorKind) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.estimator == estimator)
    }

    pub fn rows_for(&self, estimator: EstimatorKind) -> impl Iterator<Item = &ReplicationRow> {
        self.rows.iter().filter(move |r| r.estimator == estimator)
    }

    pub fn failure_count(&self) -> usize {
        self.aggregates.iter().map(|a| a.failed).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADER).expect("in-memory write");
        for r in &self.rows {
            let record: Vec<String> = match &r.outcome {
                Ok(m) => vec![
                    "replication".into(),
                    r.estimator.name().into(),
                    r.replication.to_string(),
                    format_f64(m.sqrt_pehe),
                    format_f64(m.eps_ate),
                    format_f64(m.eps_ate_signed),
                    format_f64(m.mean_abs_ite),
                    opt(m.theta_correlation),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    "ok".into(),
                ],
                Err(msg) => {
                    let mut v = vec![
                        "replication".into(),
                        r.estimator.name().into(),
                        r.replication.to_string(),
                    ];
                    v.extend(std::iter::repeat_n(String::new(), 9));
                    v.push(format!("failed: {msg}"));
                    v
                }
            };
            w.write_record(&record).expect("in-memory write");
        }
        for a in &self.aggregates {
            w.write_record([
                "aggregate".to_string(),
                a.estimator.name().into(),
                String::new(),
                opt(a.sqrt_pehe.map(|s| s.mean)),
                opt(a.eps_ate.map(|s| s.mean)),
                opt(a.eps_ate_signed),
                opt(a.mean_abs_ite),
                String::new(),
                opt(a.sqrt_pehe.map(|s| s.sd)),
                opt(a.eps_ate.map(|s| s.sd)),
                a.succeeded.to_string(),
                a.failed.to_string(),
                if a.succeeded == 0 { "failed".into() } else { "ok".into() },
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn to_markdown(&self) -> String {
        let scope = match self.metrics_on {
            MetricScope::Test => "test split",
            MetricScope::All => "all units",
        };
        let mut out = format!(
            "Metrics on the {scope}; ± is the sample standard deviation across replications.\n\n"
        );
        out.push_str("| estimator | √PEHE | ε_ATE | succeeded | failed | mean fit time (s) |\n");
        out.push_str("|---|---|---|---|---|---|\n");
        for a in &self.aggregates {
            let cell = |s: Option<MeanSd>| s.map(format_cell).unwrap_or_else(|| "failed".into());
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {:.2} |\n",
                a.estimator,
                cell(a.sqrt_pehe),
                cell(a.eps_ate),
                a.succeeded,
                a.failed,
                a.mean_runtime_secs
            ));
        }
        out
    }

    /// Writes `<stem>.csv` and `<stem>.md`, returning both paths.
    pub fn emit(&self, stem: &Path) -> Result<(PathBuf, PathBuf)> {
        if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
        }
        let csv_path = stem.with_extension("csv");
        let md_path = stem.with_extension("md");
        std::fs::write(&csv_path, self.to_csv()).map_err(|e| BenchError::io(&csv_path, e))?;
        std::fs::write(&md_path, self.to_markdown()).map_err(|e| BenchError::io(&md_path, e))?;
        Ok((csv_path, md_path))
    }
}

/// One parsed CSV record of an emitted report.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub kind: String,
    pub estimator: String,
    pub replication: Option<usize>,
    pub sqrt_pehe: Option<f64>,
    pub eps_ate: Option<f64>,
    pub eps_ate_signed: Option<f64>,
    pub mean_abs_ite: Option<f64>,
    pub sqrt_pehe_sd: Option<f64>,
    pub eps_ate_sd: Option<f64>,
    pub status: String,
}

/// Reads an emitted CSV report back.
pub fn read_report_csv(path: &Path) -> Result<Vec<CsvRecord>> {
    let bad = |message: String| BenchError::Report {
        path: path.to_path_buf(),
        message,
    };
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                Ok(None)
            } else {
                rec[i].parse().map(Some).map_err(|_| bad(format!("bad number {:?}", &rec[i])))
            }
        };
        out.push(CsvRecord {
            kind: rec[0].to_string(),
            estimator: rec[1].to_string(),
            replication: if rec[2].is_empty() {
                None
            } else {
                Some(rec[2].parse().map_err(|_| bad("bad replication index".into()))?)
            },
            sqrt_pehe: num(3)?,
            eps_ate: num(4)?,
            eps_ate_signed: num(5)?,
            mean_abs_ite: num(6)?,
            sqrt_pehe_sd: num(8)?,
            eps_ate_sd: num(9)?,
            status: rec[12].to_string(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_precision() {
        assert_eq!(format_cell(MeanSd { mean: 0.54, sd: 0.32 }), "0.54±0.32");
        assert_eq!(format_cell(MeanSd { mean: 0.319, sd: 0.008 }), "0.319±0.008");
        assert_eq!(format_cell(MeanSd { mean: 0.05, sd: 0.2 }), "0.050±0.200");
        assert_eq!(format_cell(MeanSd { mean: 1.654, sd: 0.25 }), "1.65±0.25");
    }

    fn row(e: EstimatorKind, i: usize, pehe: Option<f64>) -> ReplicationRow {
        ReplicationRow {
            estimator: e,
            replication: i,
            outcome: pehe
                .map(|p| RowMetrics {
                    sqrt_pehe: p,
                    eps_ate: p / 2.0,
                    eps_ate_signed: -p / 2.0,
                    mean_abs_ite: 1.0,
                    theta_correlation: None,
                })
                .ok_or_else(|| "boom".to_string()),
            runtime_secs: 0.5,
        }
    }

    #[test]
    fn failures_are_excluded_and_counted() {
        let rows = vec![
            row(EstimatorKind::OlsLr1, 0, Some(1.0)),
            row(EstimatorKind::OlsLr1, 1, None),
            row(EstimatorKind::OlsLr1, 2, Some(3.0)),
            row(EstimatorKind::Dml, 0, None),
        ];
        let report = MetricsReport::from_rows(
            rows,
            &[EstimatorKind::OlsLr1, EstimatorKind::Dml],
            MetricScope::Test,
        );
        let a = report.aggregate(EstimatorKind::OlsLr1).unwrap();
        assert_eq!((a.succeeded, a.failed), (2, 1));
        assert_eq!(a.sqrt_pehe.unwrap().mean, 2.0);
        let d = report.aggregate(EstimatorKind::Dml).unwrap();
        assert!(d.sqrt_pehe.is_none());
        assert_eq!(report.failure_count(), 2);
        assert!(report.to_markdown().contains("| dml | failed | failed | 0 | 1 |"));
        assert!(report.to_csv().contains("aggregate,dml,,,,,,,,,0,1,failed"));
    }
}
