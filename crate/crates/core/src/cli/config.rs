use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{load_dataset_dir, Dataset, ObservedFactIndex, Split};
use crate::error::{Error, Result};
use crate::eval::{EvalOptions, Regime, SemanticContext};
use crate::models::{preset, LossKind, ModelKind, Norm, OptimizerKind, TrainingConfig};
use crate::schema::{load_schema, ExtensionalProfile, Schema, SchemaPaths};

/// Where the schema files live: a directory with the conventional file names,
/// or explicit paths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SchemaSource {
    Dir(PathBuf),
    Files(SchemaPaths),
}

impl SchemaSource {
    pub fn paths(&self) -> SchemaPaths {
        match self {
            SchemaSource::Dir(d) => SchemaPaths::in_dir(d),
            SchemaSource::Files(p) => p.clone(),
        }
    }
}

/// Optional overrides of [`TrainingConfig`] fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingOverrides {
    pub batch_size: Option<usize>,
    pub dim: Option<usize>,
    pub learning_rate: Option<f64>,
    pub l2_weight: Option<f64>,
    pub epochs: Option<usize>,
    pub margin: Option<f64>,
    pub eval_every: Option<usize>,
    pub seed: Option<u64>,
    pub negatives_per_positive: Option<usize>,
    pub loss: Option<LossKind>,
    pub optimizer: Option<OptimizerKind>,
    pub norm: Option<Norm>,
    pub unit_entities: Option<bool>,
}

impl TrainingOverrides {
    pub fn apply(&self, c: &mut TrainingConfig) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(batch_size, dim, learning_rate, l2_weight, epochs, margin, eval_every, seed, negatives_per_positive, loss, optimizer, norm, unit_entities);
    }
}

fn default_ks() -> Vec<usize> {
    vec![1, 3, 10]
}

/// A training run as written by the user. Relative paths are resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory with `train.txt`, `valid.txt` and `test.txt`.
    pub dataset: PathBuf,
    /// Label used in reports; defaults to the dataset directory name.
    #[serde(default)]
    pub dataset_name: Option<String>,
    #[serde(default)]
    pub schema: Option<SchemaSource>,
    pub model: ModelKind,
    /// Name of a published hyperparameter preset (e.g. `Codex-S`) used as the
    /// starting point before `training` overrides.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub training: TrainingOverrides,
    #[serde(default = "default_ks")]
    pub ks: Vec<usize>,
    /// Sem@K regimes; all those the inputs support when absent.
    #[serde(default)]
    pub regimes: Option<Vec<Regime>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub eval_every: Option<usize>,
    pub ks: Option<Vec<usize>>,
    pub regimes: Option<Vec<Regime>>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    /// Makes relative paths relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset);
        match &mut self.schema {
            Some(SchemaSource::Dir(d)) => fix(d),
            Some(SchemaSource::Files(f)) => {
                fix(&mut f.types);
                fix(&mut f.signature);
                if let Some(h) = &mut f.hierarchy {
                    fix(h);
                }
            }
            None => {}
        }
    }

    pub fn apply_flags(&mut self, flags: &FlagOverrides) {
        if let Some(s) = flags.seed {
            self.training.seed = Some(s);
        }
        if let Some(e) = flags.epochs {
            self.training.epochs = Some(e);
        }
        if let Some(e) = flags.eval_every {
            self.training.eval_every = Some(e);
        }
        if let Some(ks) = &flags.ks {
            self.ks = ks.clone();
        }
        if let Some(r) = &flags.regimes {
            self.regimes = Some(r.clone());
        }
    }

    pub fn training_config(&self) -> Result<TrainingConfig> {
        let mut c = match &self.preset {
            Some(name) => preset(self.model, name)?,
            None => TrainingConfig::for_model(self.model),
        };
        self.training.apply(&mut c);
        c.validate()?;
        Ok(c)
    }

    pub fn dataset_label(&self) -> String {
        self.dataset_name.clone().unwrap_or_else(|| {
            self.dataset
                .file_name()
                .map_or_else(|| "dataset".to_owned(), |n| n.to_string_lossy().into_owned())
        })
    }

    /// Fully resolved form, as written to `config.json` in a run directory.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let training = self.training_config()?;
        let regimes = match &self.regimes {
            Some(r) => r.clone(),
            None => default_regimes(self.schema.as_ref()),
        };
        let cfg = ResolvedConfig {
            dataset: self.dataset.clone(),
            dataset_name: self.dataset_label(),
            schema: self.schema.as_ref().map(SchemaSource::paths),
            model: self.model,
            training,
            ks: self.ks.clone(),
            regimes,
        };
        cfg.check_regimes()?;
        Ok(cfg)
    }
}

/// Every regime the inputs can support: `ext` always, `base` with a schema,
/// `wup` with a schema that has a hierarchy.
fn default_regimes(schema: Option<&SchemaSource>) -> Vec<Regime> {
    let mut r = Vec::new();
    if let Some(s) = schema {
        r.push(Regime::Base);
        r.push(Regime::Ext);
        if s.paths().hierarchy.is_some() {
            r.push(Regime::Wup);
        }
    } else {
        r.push(Regime::Ext);
    }
    r
}

/// Checks requested regimes against the kind of knowledge graph at hand, before
/// anything is loaded.
pub fn check_regimes_for(schema: Option<&SchemaPaths>, regimes: &[Regime]) -> Result<()> {
    for &r in regimes {
        match (r, schema) {
            (Regime::Base | Regime::Wup, None) => {
                return Err(Error::Config(format!(
                    "Sem@K[{r}] is not defined on a schemaless knowledge graph (only ext is); \
                     provide a schema or drop `{r}` from the regimes"
                )))
            }
            (Regime::Wup, Some(p)) if p.hierarchy.is_none() => {
                return Err(Error::Config(
                    "Sem@K[wup] needs a class hierarchy; a schema without one only supports base and ext".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub dataset: PathBuf,
    pub dataset_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<SchemaPaths>,
    pub model: ModelKind,
    pub training: TrainingConfig,
    pub ks: Vec<usize>,
    pub regimes: Vec<Regime>,
}

impl ResolvedConfig {
    pub fn check_regimes(&self) -> Result<()> {
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("Ks must be a non-empty list of positive integers".into()));
        }
        check_regimes_for(self.schema.as_ref(), &self.regimes)
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            ks: self.ks.clone(),
            regimes: self.regimes.clone(),
            filtered: true,
        }
    }

    pub fn load_inputs(&self) -> Result<Inputs> {
        Inputs::load(&self.dataset, self.schema.as_ref())
    }
}

/// A loaded dataset with everything evaluation needs.
#[derive(Debug)]
pub struct Inputs {
    pub dataset: Dataset,
    pub schema: Option<Schema>,
    pub index: ObservedFactIndex,
    /// Extensional profile of the training split.
    pub profile: ExtensionalProfile,
}

impl Inputs {
    pub fn load(dataset_dir: &Path, schema: Option<&SchemaPaths>) -> Result<Self> {
        let mut dataset = load_dataset_dir(dataset_dir)?;
        let schema = schema.map(|p| load_schema(p, &mut dataset.vocab)).transpose()?;
        Ok(Inputs::new(dataset, schema))
    }

    pub fn new(dataset: Dataset, schema: Option<Schema>) -> Self {
        let index = ObservedFactIndex::build(&dataset);
        let profile = ExtensionalProfile::from_triples(dataset.split(Split::Train));
        Inputs { dataset, schema, index, profile }
    }

    pub fn context(&self) -> SemanticContext<'_> {
        SemanticContext::new(self.schema.as_ref(), Some(&self.profile))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(schema: Option<SchemaSource>) -> RunConfig {
        RunConfig {
            dataset: "data".into(),
            dataset_name: None,
            schema,
            model: ModelKind::TransE,
            preset: None,
            training: TrainingOverrides::default(),
            ks: default_ks(),
            regimes: None,
            output_dir: None,
        }
    }

    #[test]
    fn parses_minimal_json_and_rebases() {
        let cfg: RunConfig = serde_json::from_str(r#"{"dataset": "codex", "model": "transe"}"#).unwrap();
        assert_eq!(cfg.ks, vec![1, 3, 10]);
        let mut cfg = cfg;
        cfg.rebase(Path::new("/configs"));
        assert_eq!(cfg.dataset, PathBuf::from("/configs/codex"));
        assert_eq!(cfg.dataset_label(), "codex");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"dataset": "d", "model": "transe", "epoch": 3}"#);
        assert!(err.is_err());
    }

    #[test]
    fn preset_then_overrides_then_flags() {
        let mut cfg = minimal(None);
        cfg.preset = Some("Codex-S".into());
        cfg.training.dim = Some(20);
        cfg.apply_flags(&FlagOverrides { seed: Some(7), epochs: Some(3), ..Default::default() });
        let t = cfg.training_config().unwrap();
        assert_eq!((t.batch_size, t.dim, t.seed, t.epochs), (128, 20, 7, 3));
    }

    #[test]
    fn schemaless_config_rejects_base_and_wup() {
        let mut cfg = minimal(None);
        assert_eq!(cfg.resolve().unwrap().regimes, vec![Regime::Ext]);
        for r in [Regime::Base, Regime::Wup] {
            cfg.regimes = Some(vec![r]);
            let msg = cfg.resolve().unwrap_err().to_string();
            assert!(msg.contains("schemaless"), "{msg}");
        }
    }
}
