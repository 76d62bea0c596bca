use super::{ModelKind, TrainingConfig};
use crate::error::{Error, Result};

/// Dataset names accepted by [`preset`], in column order of the table below.
pub const PRESET_DATASETS: [&str; 7] = [
    "FB15K237-ET",
    "DB93K",
    "YAGO3-37K",
    "YAGO4-19K",
    "Codex-S",
    "Codex-M",
    "WN18RR",
];

// (batch size, dim, learning rate, λ) per dataset.
type Row = [(usize, usize, f64, f64); 7];

const TRANSE: Row = [
    (512, 100, 1e-3, 1e-5),
    (256, 200, 5e-3, 1e-5),
    (256, 150, 5e-3, 1e-5),
    (512, 100, 5e-2, 1e-5),
    (128, 100, 1e-3, 1e-5),
    (128, 100, 1e-3, 1e-5),
    (512, 100, 1e-3, 1e-5),
];
const DISTMULT: Row = [
    (1024, 100, 1e-3, 1e-5),
    (1024, 200, 1e-3, 1e-5),
    (1024, 150, 5e-3, 1e-5),
    (1024, 100, 5e-2, 0.0),
    (1024, 100, 1e-3, 0.0),
    (1024, 100, 1e-3, 0.0),
    (1024, 100, 1e-3, 0.0),
];
const COMPLEX: Row = [
    (1024, 100, 1e-3, 1e-2),
    (1024, 200, 5e-3, 1e-1),
    (1024, 150, 1e-3, 1e-5),
    (1024, 100, 1e-3, 1e-2),
    (1024, 100, 1e-3, 1e-2),
    (1024, 100, 1e-3, 1e-2),
    (1024, 100, 1e-3, 1e-2),
];
const SIMPLE: Row = [
    (1024, 100, 1e-3, 1e-2),
    (1024, 200, 5e-3, 1e-1),
    (1024, 150, 1e-3, 1e-5),
    (1024, 100, 1e-3, 0.0),
    (1024, 100, 1e-3, 1e-2),
    (1024, 100, 1e-3, 1e-2),
    (1024, 100, 1e-3, 0.0),
];

/// Published hyperparameters for `kind` on a benchmark; other fields keep
/// the [`TrainingConfig::for_model`] defaults. Dataset names match
/// case-insensitively.
pub fn preset(kind: ModelKind, dataset: &str) -> Result<TrainingConfig> {
    let col = PRESET_DATASETS
        .iter()
        .position(|d| d.eq_ignore_ascii_case(dataset))
        .ok_or_else(|| {
            Error::Config(format!(
                "no preset for dataset `{dataset}`; known: {}",
                PRESET_DATASETS.join(", ")
            ))
        })?;
    let row = match kind {
        // TransH shares every value with TransE.
        ModelKind::TransE | ModelKind::TransH => &TRANSE,
        ModelKind::DistMult => &DISTMULT,
        ModelKind::ComplEx => &COMPLEX,
        ModelKind::SimplE => &SIMPLE,
    };
    let (batch_size, dim, learning_rate, l2_weight) = row[col];
    Ok(TrainingConfig {
        batch_size,
        dim,
        learning_rate,
        l2_weight,
        ..TrainingConfig::for_model(kind)
    })
}
