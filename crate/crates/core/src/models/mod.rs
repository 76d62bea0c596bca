//! Embedding models: parameter storage, scoring, losses, gradients and updates.
//!
//! All scores are oriented so that higher means more plausible; the
//! translational models return the negated distance.

mod checkpoint;
mod gradient;
mod loss;
mod optimizer;
mod params;
mod presets;
mod scoring;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use gradient::{add_score_gradient, batch_objective, Gradients};
pub use loss::{loss, loss_derivatives, softplus};
pub use optimizer::{gradient_step, OptimizerState};
pub use params::{init_parameters, Matrix, ModelParameters};
pub use presets::{preset, PRESET_DATASETS};
pub use scoring::{score, score_candidates, CandidateScorer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "transe")]
    TransE,
    #[serde(rename = "transh")]
    TransH,
    #[serde(rename = "distmult")]
    DistMult,
    #[serde(rename = "complex")]
    ComplEx,
    #[serde(rename = "simple")]
    SimplE,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::TransE,
        ModelKind::TransH,
        ModelKind::DistMult,
        ModelKind::ComplEx,
        ModelKind::SimplE,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::TransH => "transh",
            ModelKind::DistMult => "distmult",
            ModelKind::ComplEx => "complex",
            ModelKind::SimplE => "simple",
        }
    }

    /// Number of |E|×d entity tables: real/imaginary parts for ComplEx,
    /// head/tail roles for SimplE.
    pub fn entity_tables(self) -> usize {
        match self {
            ModelKind::ComplEx | ModelKind::SimplE => 2,
            _ => 1,
        }
    }

    /// Number of |R|×d relation tables: TransH keeps translations and
    /// hyperplane normals, ComplEx real/imaginary parts, SimplE r and r⁻¹.
    pub fn relation_tables(self) -> usize {
        match self {
            ModelKind::TransE | ModelKind::DistMult => 1,
            _ => 2,
        }
    }

    /// Loss used for this model in the reference experiments.
    pub fn default_loss(self) -> LossKind {
        match self {
            ModelKind::TransE | ModelKind::TransH | ModelKind::DistMult => LossKind::PairwiseHinge,
            ModelKind::ComplEx | ModelKind::SimplE => LossKind::PointwiseLogistic,
        }
    }

    pub fn is_translational(self) -> bool {
        matches!(self, ModelKind::TransE | ModelKind::TransH)
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Norm {
    #[serde(rename = "l1")]
    L1,
    #[default]
    #[serde(rename = "l2")]
    L2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    /// `max(0, γ + s⁻ − s⁺)`
    #[serde(rename = "pairwise-hinge")]
    PairwiseHinge,
    /// `softplus(−s⁺) + softplus(s⁻)`
    #[serde(rename = "pointwise-logistic")]
    PointwiseLogistic,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OptimizerKind {
    #[default]
    #[serde(rename = "adam")]
    Adam,
    #[serde(rename = "sgd")]
    Sgd,
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub batch_size: usize,
    pub dim: usize,
    pub learning_rate: f64,
    /// λ of the L2 penalty on the embeddings touched by a batch.
    pub l2_weight: f64,
    pub epochs: usize,
    /// γ of the pairwise hinge loss.
    pub margin: f64,
    pub eval_every: usize,
    pub seed: u64,
    pub negatives_per_positive: usize,
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub norm: Norm,
    /// Rescale every entity embedding to unit L2 length after each step.
    /// On by default for the translational models.
    #[serde(default)]
    pub unit_entities: bool,
}

impl TrainingConfig {
    pub fn for_model(kind: ModelKind) -> Self {
        TrainingConfig {
            batch_size: 512,
            dim: 100,
            learning_rate: 1e-3,
            l2_weight: 1e-5,
            epochs: 400,
            margin: 1.0,
            eval_every: 10,
            seed: 0,
            negatives_per_positive: 1,
            loss: kind.default_loss(),
            optimizer: OptimizerKind::Adam,
            norm: Norm::L2,
            unit_entities: kind.is_translational(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be a finite non-negative number");
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return fail("l2_weight must be a finite non-negative number");
        }
        if self.loss == LossKind::PairwiseHinge && !(self.margin > 0.0 && self.margin.is_finite()) {
            return fail("margin must be positive for the pairwise hinge loss");
        }
        if self.eval_every == 0 {
            return fail("eval_every must be positive");
        }
        if self.negatives_per_positive == 0 {
            return fail("negatives_per_positive must be positive");
        }
        Ok(())
    }
}
