use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetBuilder, Split, Triple};
use crate::error::{Error, Result};
use crate::schema::Schema;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparationReport {
    pub removed_untyped_triples: usize,
    pub removed_weak_relation_triples: usize,
    pub entities_before: usize,
    pub entities_after: usize,
    pub relations_before: usize,
    pub relations_after: usize,
}

#[derive(Debug, Clone)]
pub struct PreparedDataset {
    pub dataset: Dataset,
    /// The input schema re-keyed to the new entity and relation ids.
    pub schema: Option<Schema>,
    pub report: PreparationReport,
}

/// Restricts a dataset to what Sem@K can be computed on.
///
/// 1. Triples touching an untyped entity are removed from every split.
/// 2. Valid/test triples are removed when their relation lacks a domain or a
///    range, or has fewer than `min_candidates` distinct heads or tails in the
///    (filtered) training split.
///
/// Ids are re-interned densely in train, valid, test order of first occurrence.
pub fn prepare_dataset(dataset: &Dataset, schema: &Schema, min_candidates: usize) -> Result<PreparedDataset> {
    prepare(dataset, Some(schema), min_candidates)
}

/// Preparation for datasets without a schema: only the candidate-count filter applies.
pub fn prepare_schemaless(dataset: &Dataset, min_candidates: usize) -> Result<PreparedDataset> {
    prepare(dataset, None, min_candidates)
}

fn prepare(dataset: &Dataset, schema: Option<&Schema>, min_candidates: usize) -> Result<PreparedDataset> {
    let mut report = PreparationReport {
        entities_before: dataset.num_entities(),
        relations_before: dataset.num_relations(),
        ..Default::default()
    };

    let typed = |t: &Triple| schema.is_none_or(|s| s.types.is_typed(t.h) && s.types.is_typed(t.t));
    let mut kept: [Vec<Triple>; 3] = Default::default();
    for (slot, split) in Split::ALL.into_iter().enumerate() {
        for t in dataset.split(split) {
            if typed(t) {
                kept[slot].push(*t);
            } else {
                report.removed_untyped_triples += 1;
            }
        }
    }
    if kept[0].is_empty() {
        return Err(Error::Preparation("training split is empty after preparation".into()));
    }

    let mut heads: HashMap<usize, HashSet<usize>> = HashMap::new();
    let mut tails: HashMap<usize, HashSet<usize>> = HashMap::new();
    for t in &kept[0] {
        heads.entry(t.r).or_default().insert(t.h);
        tails.entry(t.r).or_default().insert(t.t);
    }
    let rich = |r: usize| {
        let n_heads = heads.get(&r).map_or(0, HashSet::len);
        let n_tails = tails.get(&r).map_or(0, HashSet::len);
        let defined = schema.is_none_or(|s| s.signature.is_fully_defined(r));
        defined && n_heads >= min_candidates && n_tails >= min_candidates
    };
    for eval_split in &mut kept[1..] {
        let before = eval_split.len();
        eval_split.retain(|t| rich(t.r));
        report.removed_weak_relation_triples += before - eval_split.len();
    }

    let mut builder = DatasetBuilder::default();
    let v = &dataset.vocab;
    for (slot, split) in Split::ALL.into_iter().enumerate() {
        for t in &kept[slot] {
            builder.push(
                split,
                v.entities.label(t.h).unwrap_or_default(),
                v.relations.label(t.r).unwrap_or_default(),
                v.entities.label(t.t).unwrap_or_default(),
            )?;
        }
    }
    let mut out = builder.finish()?;
    out.vocab.classes = dataset.vocab.classes.clone();
    report.entities_after = out.num_entities();
    report.relations_after = out.num_relations();

    let schema = match schema {
        None => None,
        Some(s) => {
            let entity_map: Vec<Option<usize>> = v
                .entities
                .labels()
                .iter()
                .map(|l| out.vocab.entities.id(l))
                .collect();
            let relation_map: Vec<Option<usize>> = v
                .relations
                .labels()
                .iter()
                .map(|l| out.vocab.relations.id(l))
                .collect();
            Some(s.remap(&entity_map, out.num_entities(), &relation_map, out.num_relations())?)
        }
    };

    Ok(PreparedDataset {
        dataset: out,
        schema,
        report,
    })
}
