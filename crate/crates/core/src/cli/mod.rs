//! Command-line interface: `prepare`, `train`, `evaluate`, `sweep`, `report`.

mod config;
mod run;
mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{load_dataset_dir, prepare_dataset, prepare_schemaless, write_dataset, Split};
use crate::error::{Error, Result};
use crate::eval::Regime;
use crate::schema::{load_schema, write_schema, SchemaPaths};

pub use config::{
    check_regimes_for, FlagOverrides, Inputs, ResolvedConfig, RunConfig, SchemaSource, TrainingOverrides,
};
pub use run::{
    checkpoint_epochs, checkpoint_path, read_best_epoch, read_config, records_csv, run_dynamics_report,
    run_evaluation, run_training, run_training_on, EvaluateRequest, RunSummary, BEST_FILE, CHECKPOINT_DIR,
    CONFIG_FILE, DYNAMICS_FILE, RECORDS_FILE,
};
pub use sweep::{cell_dir, run_sweep, SweepCell, SweepConfig, SUMMARY_FILE};

/// Environment variable holding the directory that relative output paths are resolved against.
pub const OUTPUT_ROOT_ENV: &str = "KGSEM_OUTPUT_ROOT";

#[derive(Debug, Parser)]
#[command(name = "kgsem", version, about = "Train knowledge graph embeddings and report rank and Sem@K metrics")]
pub struct Cli {
    /// Base directory for relative output paths.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV)]
    pub output_root: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a raw dataset for semantic evaluation and re-intern its ids.
    Prepare(PrepareArgs),
    /// Train one configuration into a run directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint of a run on one split.
    Evaluate(EvaluateArgs),
    /// Train every cell of a hyperparameter grid.
    Sweep(SweepArgs),
    /// Re-evaluate all checkpoints of a run into dynamics.csv.
    Report(ReportArgs),
}

fn parse_k(k: &str) -> std::result::Result<usize, String> {
    match k.trim().parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("`{k}` is not a positive integer")),
        Ok(k) => Ok(k),
    }
}

fn parse_regime(s: &str) -> std::result::Result<Regime, String> {
    s.trim().parse::<Regime>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Default, Args)]
pub struct MetricFlags {
    /// Cut-offs for Hits@K and Sem@K, e.g. `1,3,10`.
    #[arg(long = "k", value_parser = parse_k, value_delimiter = ',')]
    pub ks: Option<Vec<usize>>,
    /// Sem@K regimes, e.g. `base,ext,wup`.
    #[arg(long, value_parser = parse_regime, value_delimiter = ',')]
    pub regimes: Option<Vec<Regime>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub eval_every: Option<usize>,
    #[command(flatten)]
    pub metrics: MetricFlags,
}

impl TrainFlags {
    fn overrides(&self) -> FlagOverrides {
        FlagOverrides {
            seed: self.seed,
            epochs: self.epochs,
            eval_every: self.eval_every,
            ks: self.metrics.ks.clone(),
            regimes: self.metrics.regimes.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    /// Directory with train.txt, valid.txt and test.txt.
    #[arg(long)]
    pub data: PathBuf,
    /// Directory with types.txt, signature.txt and optionally hierarchy.txt.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Root class label of the hierarchy, if it cannot be inferred.
    #[arg(long)]
    pub root: Option<String>,
    /// Valid/test relations need at least this many distinct training heads and tails.
    #[arg(long, default_value_t = 10)]
    pub min_candidates: usize,
    /// Regimes that will be evaluated on the output; checked against the schema.
    #[arg(long, value_parser = parse_regime, value_delimiter = ',')]
    pub regimes: Option<Vec<Regime>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run configuration (JSON).
    pub config: PathBuf,
    /// Run directory; overrides `output_dir` of the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Run directory, or a checkpoint file inside one.
    pub run: PathBuf,
    #[arg(long, default_value = "test")]
    pub split: Split,
    /// Epoch to evaluate; defaults to the best epoch.
    #[arg(long)]
    pub epoch: Option<usize>,
    #[command(flatten)]
    pub metrics: MetricFlags,
    /// Directory for the report files; defaults to `<run>/eval`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration (JSON) with `base`, `grid` and optional `base_seed`.
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub run: PathBuf,
    #[arg(long, default_value = "valid")]
    pub split: Split,
    #[command(flatten)]
    pub metrics: MetricFlags,
}

fn under_root(root: Option<&Path>, p: PathBuf) -> PathBuf {
    match root {
        Some(r) if p.is_relative() => r.join(p),
        _ => p,
    }
}

/// `--out`, else the config's `output_dir`, else `<model>-<dataset>-seed<seed>`;
/// relative results go under the output root.
fn output_dir(root: Option<&Path>, flag: Option<PathBuf>, cfg: &RunConfig, resolved: &ResolvedConfig) -> PathBuf {
    let p = flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| {
        PathBuf::from(format!("{}-{}-seed{}", resolved.model, resolved.dataset_name, resolved.training.seed))
    });
    under_root(root, p)
}

pub fn run(cli: Cli) -> Result<()> {
    let root = cli.output_root.as_deref();
    match cli.command {
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Train(a) => {
            let mut cfg = RunConfig::load(&a.config)?;
            cfg.apply_flags(&a.flags.overrides());
            let resolved = cfg.resolve()?;
            let dir = output_dir(root, a.out, &cfg, &resolved);
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let summary = run_training(&resolved, &dir)?;
            println!("{}", summary.run_dir.display());
            Ok(())
        }
        Command::Evaluate(a) => {
            let (run_dir, epoch) = locate_run(&a.run, a.epoch)?;
            let req = EvaluateRequest {
                split: a.split,
                epoch,
                ks: a.metrics.ks,
                regimes: a.metrics.regimes,
                out_dir: a.out.map(|p| under_root(root, p)),
            };
            let report = run_evaluation(&run_dir, &req)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Sweep(a) => {
            let sweep = SweepConfig::load(&a.config)?;
            let out = under_root(
                root,
                a.out.or_else(|| sweep.base.output_dir.clone()).unwrap_or_else(|| PathBuf::from("sweep")),
            );
            std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            run_sweep(&sweep, &a.flags.overrides(), &out)?;
            println!("{}", out.join(SUMMARY_FILE).display());
            Ok(())
        }
        Command::Report(a) => {
            let path = run_dynamics_report(&a.run, a.split, &a.metrics.ks, &a.metrics.regimes)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

/// Accepts a run directory or `<run>/checkpoints/epoch_N`.
fn locate_run(path: &Path, epoch: Option<usize>) -> Result<(PathBuf, Option<usize>)> {
    if path.is_dir() {
        return Ok((path.to_path_buf(), epoch));
    }
    let file_epoch = path
        .file_name()
        .and_then(|n| n.to_str()?.strip_prefix("epoch_")?.parse().ok());
    let run_dir = path.parent().and_then(Path::parent);
    match (file_epoch, run_dir) {
        (Some(e), Some(dir)) => Ok((dir.to_path_buf(), Some(epoch.unwrap_or(e)))),
        _ => Err(Error::Config(format!(
            "{} is neither a run directory nor a checkpoint inside one",
            path.display()
        ))),
    }
}

pub fn cmd_prepare(a: &PrepareArgs) -> Result<()> {
    let schema_paths = a.schema.as_deref().map(|d| SchemaPaths {
        root: a.root.clone(),
        ..SchemaPaths::in_dir(d)
    });
    if let Some(regimes) = &a.regimes {
        check_regimes_for(schema_paths.as_ref(), regimes)?;
    }
    let mut raw = load_dataset_dir(&a.data)?;
    let prepared = match &schema_paths {
        Some(p) => {
            let schema = load_schema(p, &mut raw.vocab)?;
            prepare_dataset(&raw, &schema, a.min_candidates)?
        }
        None => prepare_schemaless(&raw, a.min_candidates)?,
    };
    write_dataset(&prepared.dataset, &a.out)?;
    if let Some(schema) = &prepared.schema {
        write_schema(schema, &prepared.dataset.vocab, &a.out)?;
    }
    let path = a.out.join("preparation_report.json");
    let mut json = serde_json::to_string_pretty(&prepared.report)?;
    json.push('\n');
    std::fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    println!("{}", serde_json::to_string(&prepared.report)?);
    Ok(())
}
