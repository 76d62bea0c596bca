//! Ontology side of the evaluation: class hierarchy, entity typing, relation
//! signatures, extensional profiles and the compatibility predicates behind Sem@K.

mod compat;
mod hierarchy;
mod io;
mod profile;

use crate::data::{EntityId, RelationId};
use crate::error::{Error, Result};

pub use compat::{compatibility_base, compatibility_ext, compatibility_wup};
pub use hierarchy::{class_closure, wu_palmer, ClassHierarchy, ClassId};
pub use io::{load_schema, write_schema, SchemaPaths};
pub use profile::{build_extensional_profile, ExtensionalProfile};

/// Per-entity class sets, indexed by entity id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeAssignment {
    asserted: Vec<Vec<ClassId>>,
    closure: Vec<Vec<ClassId>>,
    most_specific: Vec<Vec<ClassId>>,
}

impl TypeAssignment {
    /// `asserted[e]` lists the classes stated for entity `e`. Without a
    /// hierarchy the closure and most-specific sets equal the asserted set.
    pub fn new(mut asserted: Vec<Vec<ClassId>>, hierarchy: Option<&ClassHierarchy>) -> Result<Self> {
        for set in &mut asserted {
            set.sort_unstable();
            set.dedup();
        }
        let (closure, most_specific) = match hierarchy {
            None => (asserted.clone(), asserted.clone()),
            Some(h) => {
                let mut closure = Vec::with_capacity(asserted.len());
                let mut most_specific = Vec::with_capacity(asserted.len());
                for set in &asserted {
                    let mut all = Vec::new();
                    for &c in set {
                        all.extend(h.closure(c)?);
                    }
                    all.sort_unstable();
                    all.dedup();
                    closure.push(all);
                    most_specific.push(
                        set.iter()
                            .copied()
                            .filter(|&c| !set.iter().any(|&d| h.is_strict_ancestor(c, d)))
                            .collect(),
                    );
                }
                (closure, most_specific)
            }
        };
        Ok(TypeAssignment {
            asserted,
            closure,
            most_specific,
        })
    }

    pub fn num_entities(&self) -> usize {
        self.asserted.len()
    }

    pub fn asserted(&self, e: EntityId) -> &[ClassId] {
        self.asserted.get(e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Asserted classes and all of their ancestors.
    pub fn closure(&self, e: EntityId) -> &[ClassId] {
        self.closure.get(e).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Asserted classes that are not an ancestor of another asserted class.
    pub fn most_specific(&self, e: EntityId) -> &[ClassId] {
        self.most_specific.get(e).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_typed(&self, e: EntityId) -> bool {
        !self.asserted(e).is_empty()
    }
}

/// Declared domain and range classes per relation; `None` when undeclared.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RelationSignature {
    domain: Vec<Option<Vec<ClassId>>>,
    range: Vec<Option<Vec<ClassId>>>,
}

impl RelationSignature {
    pub fn new(mut domain: Vec<Option<Vec<ClassId>>>, mut range: Vec<Option<Vec<ClassId>>>) -> Self {
        let n = domain.len().max(range.len());
        domain.resize(n, None);
        range.resize(n, None);
        for set in domain.iter_mut().chain(range.iter_mut()).flatten() {
            set.sort_unstable();
            set.dedup();
        }
        RelationSignature { domain, range }
    }

    pub fn num_relations(&self) -> usize {
        self.domain.len()
    }

    pub fn domain(&self, r: RelationId) -> Option<&[ClassId]> {
        self.domain.get(r).and_then(|d| d.as_deref())
    }

    pub fn range(&self, r: RelationId) -> Option<&[ClassId]> {
        self.range.get(r).and_then(|d| d.as_deref())
    }

    pub fn is_fully_defined(&self, r: RelationId) -> bool {
        self.domain(r).is_some() && self.range(r).is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schema {
    pub hierarchy: Option<ClassHierarchy>,
    pub types: TypeAssignment,
    pub signature: RelationSignature,
}

impl Schema {
    pub fn new(
        hierarchy: Option<ClassHierarchy>,
        asserted: Vec<Vec<ClassId>>,
        signature: RelationSignature,
    ) -> Result<Self> {
        if let Some(h) = &hierarchy {
            let classes = asserted
                .iter()
                .flatten()
                .chain(signature.domain.iter().flatten().flatten())
                .chain(signature.range.iter().flatten().flatten());
            for &c in classes {
                if !h.contains(c) {
                    return Err(Error::Schema(format!("class {c} is not part of the hierarchy")));
                }
            }
        }
        let types = TypeAssignment::new(asserted, hierarchy.as_ref())?;
        Ok(Schema {
            hierarchy,
            types,
            signature,
        })
    }

    /// Re-keys entities and relations after re-interning. `entity_map[old]`
    /// is the new id or `None` for dropped entities; likewise for relations.
    pub fn remap(
        &self,
        entity_map: &[Option<EntityId>],
        num_entities: usize,
        relation_map: &[Option<RelationId>],
        num_relations: usize,
    ) -> Result<Self> {
        let mut asserted = vec![Vec::new(); num_entities];
        for (old, new) in entity_map.iter().enumerate() {
            if let Some(new) = *new {
                asserted[new] = self.types.asserted(old).to_vec();
            }
        }
        let mut domain = vec![None; num_relations];
        let mut range = vec![None; num_relations];
        for (old, new) in relation_map.iter().enumerate() {
            if let Some(new) = *new {
                domain[new] = self.signature.domain(old).map(<[ClassId]>::to_vec);
                range[new] = self.signature.range(old).map(<[ClassId]>::to_vec);
            }
        }
        Schema::new(
            self.hierarchy.clone(),
            asserted,
            RelationSignature::new(domain, range),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Thing(0) <- Work(1) <- Film(2)
    #[test]
    fn closure_of_film_entity() {
        let h = ClassHierarchy::new(3, &[(1, 0), (2, 1)], None).unwrap();
        let types = TypeAssignment::new(vec![vec![2]], Some(&h)).unwrap();
        assert_eq!(types.closure(0), &[0, 1, 2]);
        assert_eq!(types.most_specific(0), &[2]);
    }

    #[test]
    fn most_specific_drops_asserted_ancestors() {
        let h = ClassHierarchy::new(4, &[(1, 0), (2, 1), (3, 0)], None).unwrap();
        let types = TypeAssignment::new(vec![vec![0, 1, 2, 3], vec![]], Some(&h)).unwrap();
        assert_eq!(types.most_specific(0), &[2, 3]);
        assert!(types.asserted(0).iter().all(|c| types.closure(0).contains(c)));
        assert!(!types.is_typed(1));
    }

    #[test]
    fn signature_classes_must_exist() {
        let h = ClassHierarchy::new(2, &[(1, 0)], None).unwrap();
        let sig = RelationSignature::new(vec![Some(vec![5])], vec![None]);
        assert!(Schema::new(Some(h), vec![], sig).is_err());
    }
}
