use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{FlagOverrides, RunConfig, TrainingOverrides};
use super::run::{csv_text, run_training_on, RunSummary};
use crate::error::{Error, Result};
use crate::eval::metrics_csv_values;

pub const SUMMARY_FILE: &str = "summary.csv";

/// A hyperparameter grid over [`TrainingOverrides`] fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Axis name → values. Cells enumerate the Cartesian product with axes in
    /// name order, the last axis varying fastest.
    pub grid: BTreeMap<String, Vec<Value>>,
    /// Cell `i` trains with seed `base_seed + i`. Defaults to the base seed.
    #[serde(default)]
    pub base_seed: Option<u64>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: SweepConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base.rebase(path.parent().unwrap_or(Path::new("")));
        Ok(cfg)
    }

    /// The axis assignments of every cell, in cell order.
    pub fn cells(&self) -> Result<Vec<BTreeMap<String, Value>>> {
        if self.grid.is_empty() || self.grid.values().any(Vec::is_empty) {
            return Err(Error::Config("the sweep grid is empty".into()));
        }
        if self.grid.contains_key("seed") {
            return Err(Error::Config("`seed` cannot be a grid axis; cell seeds derive from base_seed".into()));
        }
        let mut cells = vec![BTreeMap::new()];
        for (axis, values) in &self.grid {
            cells = cells
                .into_iter()
                .flat_map(|cell| {
                    values.iter().map(move |v| {
                        let mut c = cell.clone();
                        c.insert(axis.clone(), v.clone());
                        c
                    })
                })
                .collect();
        }
        Ok(cells)
    }

    /// Run configuration of cell `index` with the given axis values.
    pub fn cell_config(&self, index: usize, cell: &BTreeMap<String, Value>) -> Result<RunConfig> {
        let mut training = serde_json::to_value(&self.base.training)?;
        let obj = training.as_object_mut().expect("overrides serialize to an object");
        for (k, v) in cell {
            obj.insert(k.clone(), v.clone());
        }
        let overrides: TrainingOverrides = serde_json::from_value(training)
            .map_err(|e| Error::Config(format!("sweep cell {index}: {e}")))?;
        let base_seed = match self.base_seed {
            Some(s) => s,
            None => self.base.training_config()?.seed,
        };
        let mut cfg = self.base.clone();
        cfg.training = overrides;
        cfg.training.seed = Some(base_seed + index as u64);
        Ok(cfg)
    }
}

#[derive(Debug)]
pub struct SweepCell {
    pub index: usize,
    pub axes: BTreeMap<String, Value>,
    pub seed: u64,
    pub run: RunSummary,
}

pub fn cell_dir(out: &Path, index: usize) -> PathBuf {
    out.join(format!("cell_{index:03}"))
}

/// Runs every cell sequentially into `out/cell_NNN` and writes `out/summary.csv`
/// with the best validation metrics of each cell.
pub fn run_sweep(sweep: &SweepConfig, flags: &FlagOverrides, out: &Path) -> Result<Vec<SweepCell>> {
    let cells = sweep.cells()?;
    let mut base = sweep.base.clone();
    base.apply_flags(&FlagOverrides { seed: None, ..flags.clone() });
    let sweep = SweepConfig {
        base,
        base_seed: flags.seed.or(sweep.base_seed),
        ..sweep.clone()
    };
    let resolved_base = sweep.base.resolve()?;
    let inputs = resolved_base.load_inputs()?;

    let mut results = Vec::new();
    for (index, axes) in cells.into_iter().enumerate() {
        let cfg = sweep.cell_config(index, &axes)?.resolve()?;
        let dir = cell_dir(out, index);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        log::info!("sweep cell {index}: {axes:?}");
        let run = run_training_on(&cfg, &inputs, &dir)?;
        results.push(SweepCell { index, axes, seed: cfg.training.seed, run });
    }

    let ks = &resolved_base.ks;
    let regimes = &resolved_base.regimes;
    let mut header = vec!["cell".to_owned(), "seed".to_owned()];
    header.extend(sweep.grid.keys().cloned());
    header.extend(["best_epoch".to_owned(), "valid_mrr".to_owned()]);
    for r in regimes {
        header.extend(ks.iter().map(|k| format!("sem_{r}@{k}")));
    }
    let mut rows = Vec::new();
    for cell in &results {
        let mut row = vec![cell.index.to_string(), cell.seed.to_string()];
        row.extend(cell.axes.values().map(Value::to_string));
        row.push(cell.run.best_epoch.to_string());
        match &cell.run.best_metrics {
            Some(m) => {
                row.push(m.mrr.to_string());
                row.extend(metrics_csv_values(m, ks, regimes)?.into_iter().skip(2 + ks.len()));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 1 + ks.len() * regimes.len())),
        }
        rows.push(row);
    }
    let path = out.join(SUMMARY_FILE);
    std::fs::write(&path, csv_text(&header, &rows)?).map_err(|e| Error::io(&path, e))?;
    Ok(results)
}
