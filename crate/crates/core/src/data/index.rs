use std::collections::HashMap;

use super::{Dataset, EntityId, RelationId, Triple};

/// Every known fact of train ∪ valid ∪ test, keyed for head and tail lookups.
/// Entity lists are sorted and duplicate-free.
#[derive(Debug, Clone, Default)]
pub struct ObservedFactIndex {
    heads_of: HashMap<(RelationId, EntityId), Vec<EntityId>>,
    tails_of: HashMap<(EntityId, RelationId), Vec<EntityId>>,
}

impl ObservedFactIndex {
    pub fn build(dataset: &Dataset) -> Self {
        Self::from_triples(dataset.all_triples())
    }

    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut index = ObservedFactIndex::default();
        for t in triples {
            index.heads_of.entry((t.r, t.t)).or_default().push(t.h);
            index.tails_of.entry((t.h, t.r)).or_default().push(t.t);
        }
        for list in index.heads_of.values_mut().chain(index.tails_of.values_mut()) {
            list.sort_unstable();
            list.dedup();
        }
        index
    }

    /// Heads `h` such that `(h, relation, tail)` is observed.
    pub fn heads_of(&self, relation: RelationId, tail: EntityId) -> &[EntityId] {
        self.heads_of
            .get(&(relation, tail))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Tails `t` such that `(head, relation, t)` is observed.
    pub fn tails_of(&self, head: EntityId, relation: RelationId) -> &[EntityId] {
        self.tails_of
            .get(&(head, relation))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.tails_of(triple.h, triple.r).binary_search(&triple.t).is_ok()
    }
}

pub fn build_observed_index(dataset: &Dataset) -> ObservedFactIndex {
    ObservedFactIndex::build(dataset)
}
