use std::collections::{HashMap, HashSet};

use crate::data::{EntityId, RelationId, Triple};

/// Entities observed as heads and tails of each relation in a reference triple set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtensionalProfile {
    head_entities: HashMap<RelationId, HashSet<EntityId>>,
    tail_entities: HashMap<RelationId, HashSet<EntityId>>,
}

impl ExtensionalProfile {
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut profile = ExtensionalProfile::default();
        for t in triples {
            profile.head_entities.entry(t.r).or_default().insert(t.h);
            profile.tail_entities.entry(t.r).or_default().insert(t.t);
        }
        profile
    }

    pub fn head_entities(&self, r: RelationId) -> Option<&HashSet<EntityId>> {
        self.head_entities.get(&r)
    }

    pub fn tail_entities(&self, r: RelationId) -> Option<&HashSet<EntityId>> {
        self.tail_entities.get(&r)
    }

    pub fn is_head_of(&self, e: EntityId, r: RelationId) -> bool {
        self.head_entities(r).is_some_and(|s| s.contains(&e))
    }

    pub fn is_tail_of(&self, e: EntityId, r: RelationId) -> bool {
        self.tail_entities(r).is_some_and(|s| s.contains(&e))
    }

    pub fn is_empty(&self) -> bool {
        self.head_entities.is_empty()
    }
}

pub fn build_extensional_profile(triples: &[Triple]) -> ExtensionalProfile {
    ExtensionalProfile::from_triples(triples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_triple() {
        let p = build_extensional_profile(&[Triple::new(0, 0, 1)]);
        assert_eq!(p.head_entities(0), Some(&HashSet::from([0])));
        assert_eq!(p.tail_entities(0), Some(&HashSet::from([1])));
    }

    #[test]
    fn empty_input() {
        let p = build_extensional_profile(&[]);
        assert!(p.is_empty());
        assert!(p.head_entities(0).is_none());
    }

    #[test]
    fn matches_projection_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let triples: Vec<Triple> = (0..50)
            .map(|_| Triple::new(rng.gen_range(0..15), rng.gen_range(0..4), rng.gen_range(0..15)))
            .collect();
        let p = build_extensional_profile(&triples);
        for r in 0..4 {
            let heads: HashSet<usize> = triples.iter().filter(|t| t.r == r).map(|t| t.h).collect();
            let tails: HashSet<usize> = triples.iter().filter(|t| t.r == r).map(|t| t.t).collect();
            assert_eq!(p.head_entities(r).cloned().unwrap_or_default(), heads);
            assert_eq!(p.tail_entities(r).cloned().unwrap_or_default(), tails);
        }
    }
}
