use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MetricsReport, Regime};
use crate::error::{Error, Result};
use crate::models::ModelKind;

/// A [`MetricsReport`] with the context it was computed in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: ModelKind,
    pub epoch: usize,
    pub split: String,
    pub dataset: String,
    pub metrics: MetricsReport,
}

/// `mr, mrr, hits@k…, sem_<regime>@k…`
pub fn metrics_csv_header(ks: &[usize], regimes: &[Regime]) -> Vec<String> {
    let mut cols = vec!["mr".to_owned(), "mrr".to_owned()];
    cols.extend(ks.iter().map(|k| format!("hits@{k}")));
    for r in regimes {
        cols.extend(ks.iter().map(|k| format!("sem_{r}@{k}")));
    }
    cols
}

/// Values in the column order of [`metrics_csv_header`]. Floats use Rust's
/// shortest round-trip formatting.
pub fn metrics_csv_values(report: &MetricsReport, ks: &[usize], regimes: &[Regime]) -> Result<Vec<String>> {
    let missing = |what: String| Error::Config(format!("report has no {what}"));
    let mut vals = vec![report.mr.to_string(), report.mrr.to_string()];
    for k in ks {
        let v = report.hits.get(k).ok_or_else(|| missing(format!("Hits@{k}")))?;
        vals.push(v.to_string());
    }
    for &r in regimes {
        let by_k = report.sem(r).ok_or_else(|| missing(format!("Sem@K[{r}]")))?;
        for k in ks {
            let v = by_k.get(k).ok_or_else(|| missing(format!("Sem@{k}[{r}]")))?;
            vals.push(v.to_string());
        }
    }
    Ok(vals)
}

/// Writes `<stem>.json` and `<stem>.csv` (header plus one row) into `dir`.
pub fn write_report(report: &EvaluationReport, ks: &[usize], regimes: &[Regime], dir: &Path, stem: &str) -> Result<()> {
    let json_path = dir.join(format!("{stem}.json"));
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    std::fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))?;

    let csv_path = dir.join(format!("{stem}.csv"));
    let mut w = csv::Writer::from_path(&csv_path)?;
    let mut header = vec!["model".to_owned(), "dataset".to_owned(), "split".to_owned(), "epoch".to_owned()];
    header.extend(metrics_csv_header(ks, regimes));
    w.write_record(&header)?;
    let mut row = vec![
        report.model.name().to_owned(),
        report.dataset.clone(),
        report.split.clone(),
        report.epoch.to_string(),
    ];
    row.extend(metrics_csv_values(&report.metrics, ks, regimes)?);
    w.write_record(&row)?;
    w.flush().map_err(|e| Error::io(&csv_path, e))
}
