//! Negative sampling, the epoch loop and best-epoch selection.

use log::{debug, info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, ObservedFactIndex, Triple};
use crate::error::{Error, Result};
use crate::eval::{evaluate_split, EvalOptions, MetricsReport, SemanticContext};
use crate::models::{gradient_step, init_parameters, Checkpoint, ModelKind, ModelParameters, OptimizerState, TrainingConfig};

/// Corrupts the head or the tail (probability ½ each) with an entity drawn
/// uniformly from all entities except the one it replaces.
pub fn sample_negative<R: Rng + ?Sized>(positive: &Triple, num_entities: usize, rng: &mut R) -> Result<Triple> {
    if num_entities < 2 {
        return Err(Error::Sampling(format!(
            "negative sampling needs at least 2 entities, the vocabulary has {num_entities}"
        )));
    }
    let corrupt_head = rng.gen_bool(0.5);
    let orig = if corrupt_head { positive.h } else { positive.t };
    let mut e = rng.gen_range(0..num_entities - 1);
    if e >= orig {
        e += 1;
    }
    Ok(if corrupt_head {
        Triple { h: e, ..*positive }
    } else {
        Triple { t: e, ..*positive }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_train_loss: f64,
    /// Present on evaluation epochs only.
    pub valid_metrics: Option<MetricsReport>,
}

/// Earliest epoch with the highest validation MRR.
pub fn select_best_epoch(records: &[EpochRecord]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for rec in records {
        if let Some(m) = &rec.valid_metrics {
            if best.is_none_or(|(_, mrr)| m.mrr > mrr) {
                best = Some((rec.epoch, m.mrr));
            }
        }
    }
    best.map(|(e, _)| e)
        .ok_or_else(|| Error::Selection("no evaluated epoch to select from".into()))
}

/// Progress notifications, for callers that persist intermediate state.
pub enum TrainingEvent<'a> {
    /// Freshly initialised parameters (epoch 0).
    Initialized(&'a ModelParameters),
    /// End of an epoch.
    Epoch(&'a EpochRecord, &'a ModelParameters),
}

#[derive(Debug)]
pub struct TrainOutcome {
    /// Checkpoint with the best validation MRR; when no epoch was evaluated,
    /// the last good parameters.
    pub best: Checkpoint,
    pub records: Vec<EpochRecord>,
    /// The error that stopped training early, if any.
    pub aborted: Option<Error>,
}

/// What the training loop evaluates against.
#[derive(Debug, Clone, Copy)]
pub struct Validation<'a> {
    /// Filter index over all known triples.
    pub index: &'a ObservedFactIndex,
    pub context: SemanticContext<'a>,
    pub options: &'a EvalOptions,
}

pub fn train(
    dataset: &Dataset,
    validation: Validation<'_>,
    kind: ModelKind,
    config: &TrainingConfig,
) -> Result<TrainOutcome> {
    train_with_observer(dataset, validation, kind, config, |_| Ok(()))
}

/// Runs `config.epochs` epochs of mini-batch training. Initialisation uses
/// `config.seed` directly; shuffling and negative sampling use a second
/// ChaCha8 stream of the same seed.
pub fn train_with_observer(
    dataset: &Dataset,
    validation: Validation<'_>,
    kind: ModelKind,
    config: &TrainingConfig,
    mut observer: impl FnMut(TrainingEvent<'_>) -> Result<()>,
) -> Result<TrainOutcome> {
    config.validate()?;
    validation.options.validate(&validation.context)?;
    if dataset.train.is_empty() {
        return Err(Error::Config("the training split is empty".into()));
    }
    let n_e = dataset.num_entities();
    if n_e < 2 {
        return Err(Error::Sampling(format!("training needs at least 2 entities, got {n_e}")));
    }
    let mut params = init_parameters(kind, (n_e, dataset.num_relations(), config.dim), config.seed)?.with_norm(config.norm);
    observer(TrainingEvent::Initialized(&params))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut optimizer = OptimizerState::new(config.optimizer, &params);
    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size * config.negatives_per_positive);
    let mut records = Vec::new();
    let mut best: Option<(f64, Checkpoint)> = None;
    let mut aborted = None;
    let mut last_good = Checkpoint { epoch: 0, params: params.clone() };

    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            for &i in chunk {
                let pos = dataset.train[i];
                for _ in 0..config.negatives_per_positive {
                    batch.push((pos, sample_negative(&pos, n_e, &mut rng)?));
                }
            }
            match gradient_step(&mut params, &mut optimizer, &batch, config) {
                Ok(l) => loss_sum += l * batch.len() as f64,
                Err(e @ Error::Numeric(_)) => {
                    warn!("epoch {epoch}: {e}; stopping with the last good parameters");
                    aborted = Some(e);
                    break 'epochs;
                }
                Err(e) => return Err(e),
            }
        }
        if let Err(e) = params.check_finite() {
            warn!("epoch {epoch}: {e}; stopping with the last good parameters");
            aborted = Some(e);
            break;
        }
        let mean_train_loss = loss_sum / (order.len() * config.negatives_per_positive) as f64;

        let valid_metrics = if epoch % config.eval_every == 0 && !dataset.valid.is_empty() {
            let m = match evaluate_split(
                &params,
                &dataset.valid,
                validation.index,
                &validation.context,
                validation.options,
            ) {
                Ok(m) => m,
                Err(e @ Error::Numeric(_)) => {
                    warn!("epoch {epoch}: validation failed: {e}; stopping with the last good parameters");
                    aborted = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            };
            info!("epoch {epoch}: loss {mean_train_loss:.6}, valid MRR {:.4}", m.mrr);
            if best.as_ref().is_none_or(|(mrr, _)| m.mrr > *mrr) {
                best = Some((m.mrr, Checkpoint { epoch, params: params.clone() }));
            }
            Some(m)
        } else {
            debug!("epoch {epoch}: loss {mean_train_loss:.6}");
            None
        };
        let record = EpochRecord { epoch, mean_train_loss, valid_metrics };
        observer(TrainingEvent::Epoch(&record, &params))?;
        records.push(record);
        last_good = Checkpoint { epoch, params: params.clone() };
    }

    let best = best.map_or(last_good, |(_, ck)| ck);
    Ok(TrainOutcome { best, records, aborted })
}
