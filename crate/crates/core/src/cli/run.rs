use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use super::config::{Inputs, ResolvedConfig};
use crate::data::Split;
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_split, metrics_csv_header, metrics_csv_values, write_report, EvalOptions, EvaluationReport,
    MetricsReport, Regime,
};
use crate::models::{read_checkpoint, write_checkpoint, Checkpoint};
use crate::training::{train_with_observer, EpochRecord, TrainingEvent, Validation};

pub const CONFIG_FILE: &str = "config.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const BEST_FILE: &str = "best";
pub const ABORTED_FILE: &str = "aborted";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const DYNAMICS_FILE: &str = "dynamics.csv";

pub fn checkpoint_path(run_dir: &Path, epoch: usize) -> PathBuf {
    run_dir.join(CHECKPOINT_DIR).join(format!("epoch_{epoch}"))
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// CSV text with a header row.
pub(crate) fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("CSV buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields"))
}

/// `epoch, loss, mr, mrr, hits@k…, sem_<regime>@k…`, one row per evaluated epoch.
pub fn records_csv(records: &[EpochRecord], ks: &[usize], regimes: &[Regime]) -> Result<String> {
    let mut header = vec!["epoch".to_owned(), "loss".to_owned()];
    header.extend(metrics_csv_header(ks, regimes));
    let mut rows = Vec::new();
    for rec in records {
        if let Some(m) = &rec.valid_metrics {
            let mut row = vec![rec.epoch.to_string(), rec.mean_train_loss.to_string()];
            row.extend(metrics_csv_values(m, ks, regimes)?);
            rows.push(row);
        }
    }
    csv_text(&header, &rows)
}

#[derive(Debug)]
pub struct RunSummary {
    pub run_dir: PathBuf,
    pub best_epoch: usize,
    /// Validation metrics at the best epoch, when any epoch was evaluated.
    pub best_metrics: Option<MetricsReport>,
    pub records: Vec<EpochRecord>,
    pub aborted: Option<String>,
}

/// Trains one configuration into `run_dir`.
///
/// ```text
/// run_dir/
///   config.json          resolved configuration
///   records.csv          one row per evaluated epoch
///   checkpoints/epoch_N  initial parameters (N = 0) and every evaluated epoch
///   best                 epoch of the selected checkpoint
/// ```
pub fn run_training(cfg: &ResolvedConfig, run_dir: &Path) -> Result<RunSummary> {
    cfg.check_regimes()?;
    let inputs = cfg.load_inputs()?;
    run_training_on(cfg, &inputs, run_dir)
}

pub fn run_training_on(cfg: &ResolvedConfig, inputs: &Inputs, run_dir: &Path) -> Result<RunSummary> {
    let ck_dir = run_dir.join(CHECKPOINT_DIR);
    if ck_dir.exists() {
        // Stale checkpoints from an earlier run would break `report`.
        for entry in fs::read_dir(&ck_dir).map_err(|e| Error::io(&ck_dir, e))? {
            let path = entry.map_err(|e| Error::io(&ck_dir, e))?.path();
            if path.file_name().is_some_and(|n| n.to_string_lossy().starts_with("epoch_")) {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
            }
        }
    }
    create_dir(&ck_dir)?;
    let aborted_path = run_dir.join(ABORTED_FILE);
    if aborted_path.exists() {
        fs::remove_file(&aborted_path).map_err(|e| Error::io(&aborted_path, e))?;
    }
    let mut json = serde_json::to_string_pretty(cfg)?;
    json.push('\n');
    write_file(&run_dir.join(CONFIG_FILE), json)?;

    let options = cfg.eval_options();
    let validation = Validation {
        index: &inputs.index,
        context: inputs.context(),
        options: &options,
    };
    let save = |epoch: usize, params: &crate::models::ModelParameters| {
        let ck = Checkpoint { epoch, params: params.clone() };
        write_checkpoint(&checkpoint_path(run_dir, epoch), &ck)
    };
    let outcome = train_with_observer(&inputs.dataset, validation, cfg.model, &cfg.training, |event| match event {
        TrainingEvent::Initialized(p) => save(0, p),
        TrainingEvent::Epoch(rec, p) if rec.valid_metrics.is_some() => save(rec.epoch, p),
        TrainingEvent::Epoch(..) => Ok(()),
    })?;

    write_file(&run_dir.join(RECORDS_FILE), records_csv(&outcome.records, &cfg.ks, &cfg.regimes)?)?;
    let best_epoch = outcome.best.epoch;
    let best_path = checkpoint_path(run_dir, best_epoch);
    if !best_path.exists() {
        write_checkpoint(&best_path, &outcome.best)?;
    }
    write_file(&run_dir.join(BEST_FILE), format!("{best_epoch}\n"))?;
    let aborted = outcome.aborted.map(|e| e.to_string());
    if let Some(msg) = &aborted {
        warn!("training stopped early: {msg}");
        write_file(&aborted_path, format!("{msg}\n"))?;
    }
    let best_metrics = outcome
        .records
        .iter()
        .find(|r| r.epoch == best_epoch)
        .and_then(|r| r.valid_metrics.clone());
    info!("run written to {} (best epoch {best_epoch})", run_dir.display());
    Ok(RunSummary {
        run_dir: run_dir.to_path_buf(),
        best_epoch,
        best_metrics,
        records: outcome.records,
        aborted,
    })
}

pub fn read_config(run_dir: &Path) -> Result<ResolvedConfig> {
    let path = run_dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn read_best_epoch(run_dir: &Path) -> Result<usize> {
    let path = run_dir.join(BEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    text.trim()
        .parse()
        .map_err(|_| Error::Parse { path, line: 1, message: format!("not an epoch number: `{}`", text.trim()) })
}

/// Epochs with a checkpoint in the run directory, ascending.
pub fn checkpoint_epochs(run_dir: &Path) -> Result<Vec<usize>> {
    let dir = run_dir.join(CHECKPOINT_DIR);
    let mut epochs = Vec::new();
    for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let name = entry.map_err(|e| Error::io(&dir, e))?.file_name();
        if let Some(n) = name.to_string_lossy().strip_prefix("epoch_").and_then(|s| s.parse().ok()) {
            epochs.push(n);
        }
    }
    epochs.sort_unstable();
    Ok(epochs)
}

/// What `evaluate` should compute.
#[derive(Debug, Clone)]
pub struct EvaluateRequest {
    pub split: Split,
    /// Defaults to the run's best epoch.
    pub epoch: Option<usize>,
    /// Override the run's Ks and regimes.
    pub ks: Option<Vec<usize>>,
    pub regimes: Option<Vec<Regime>>,
    /// Defaults to `<run_dir>/eval`.
    pub out_dir: Option<PathBuf>,
}

fn effective(cfg: &ResolvedConfig, ks: &Option<Vec<usize>>, regimes: &Option<Vec<Regime>>) -> Result<ResolvedConfig> {
    let mut cfg = cfg.clone();
    if let Some(ks) = ks {
        cfg.ks = ks.clone();
    }
    if let Some(r) = regimes {
        cfg.regimes = r.clone();
    }
    cfg.check_regimes()?;
    Ok(cfg)
}

/// Evaluates one checkpoint of a run; writes `<split>_epoch_<n>.json` and `.csv`.
pub fn run_evaluation(run_dir: &Path, req: &EvaluateRequest) -> Result<EvaluationReport> {
    let cfg = effective(&read_config(run_dir)?, &req.ks, &req.regimes)?;
    let epoch = match req.epoch {
        Some(e) => e,
        None => read_best_epoch(run_dir)?,
    };
    let ck = read_checkpoint(&checkpoint_path(run_dir, epoch))?;
    let inputs = cfg.load_inputs()?;
    let metrics = evaluate_split(
        &ck.params,
        inputs.dataset.split(req.split),
        &inputs.index,
        &inputs.context(),
        &cfg.eval_options(),
    )?;
    let report = EvaluationReport {
        model: cfg.model,
        epoch: ck.epoch,
        split: req.split.name().to_owned(),
        dataset: cfg.dataset_name.clone(),
        metrics,
    };
    let out = req.out_dir.clone().unwrap_or_else(|| run_dir.join("eval"));
    create_dir(&out)?;
    let stem = format!("{}_epoch_{}", req.split.name(), ck.epoch);
    write_report(&report, &cfg.ks, &cfg.regimes, &out, &stem)?;
    Ok(report)
}

/// Re-evaluates every checkpoint of a run on `split` and writes the plot-ready
/// `dynamics.csv`: `epoch, mrr, sem_<regime>@k…`.
pub fn run_dynamics_report(
    run_dir: &Path,
    split: Split,
    ks: &Option<Vec<usize>>,
    regimes: &Option<Vec<Regime>>,
) -> Result<PathBuf> {
    let cfg = effective(&read_config(run_dir)?, ks, regimes)?;
    let inputs = cfg.load_inputs()?;
    let options: EvalOptions = cfg.eval_options();
    let mut header = vec!["epoch".to_owned(), "mrr".to_owned()];
    for r in &cfg.regimes {
        header.extend(cfg.ks.iter().map(|k| format!("sem_{r}@{k}")));
    }
    let mut rows = Vec::new();
    for epoch in checkpoint_epochs(run_dir)? {
        let ck = read_checkpoint(&checkpoint_path(run_dir, epoch))?;
        let m = evaluate_split(&ck.params, inputs.dataset.split(split), &inputs.index, &inputs.context(), &options)?;
        let mut row = vec![epoch.to_string(), m.mrr.to_string()];
        // Skip mr, mrr and the Hits columns of the full metric row.
        row.extend(metrics_csv_values(&m, &cfg.ks, &cfg.regimes)?.into_iter().skip(2 + cfg.ks.len()));
        rows.push(row);
    }
    let path = run_dir.join(DYNAMICS_FILE);
    write_file(&path, csv_text(&header, &rows)?)?;
    Ok(path)
}
