use super::{ClassId, ExtensionalProfile, Schema};
use crate::data::{EntityId, Triple};
use crate::error::{Error, Result};

fn intersects(sorted_a: &[ClassId], sorted_b: &[ClassId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < sorted_a.len() && j < sorted_b.len() {
        match sorted_a[i].cmp(&sorted_b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn require_typed(schema: &Schema, e: EntityId) -> Result<()> {
    if schema.types.is_typed(e) {
        Ok(())
    } else {
        Err(Error::Schema(format!(
            "entity {e} has no type; untyped entities must be removed before semantic evaluation"
        )))
    }
}

/// Schema-based compatibility: the candidate head's closed types meet the
/// domain of `query.r` and the candidate tail's closed types meet its range.
/// An undeclared side is always satisfied.
pub fn compatibility_base(query: &Triple, candidate: &Triple, schema: &Schema) -> Result<bool> {
    require_typed(schema, candidate.h)?;
    require_typed(schema, candidate.t)?;
    let sig = &schema.signature;
    let head_ok = sig
        .domain(query.r)
        .is_none_or(|dom| intersects(schema.types.closure(candidate.h), dom));
    let tail_ok = sig
        .range(query.r)
        .is_none_or(|rng| intersects(schema.types.closure(candidate.t), rng));
    Ok(head_ok && tail_ok)
}

/// Hierarchy-weighted compatibility: for each side, the best Wu-Palmer
/// similarity between a most-specific class of the candidate entity and a
/// signature class; the result is the smaller of the two sides.
pub fn compatibility_wup(query: &Triple, candidate: &Triple, schema: &Schema) -> Result<f64> {
    require_typed(schema, candidate.h)?;
    require_typed(schema, candidate.t)?;
    let hierarchy = schema
        .hierarchy
        .as_ref()
        .ok_or_else(|| Error::Config("the wup regime needs a class hierarchy".into()))?;
    let side = |e: EntityId, expected: Option<&[ClassId]>| -> f64 {
        let Some(expected) = expected else { return 1.0 };
        let mut best = 0.0_f64;
        for &c in schema.types.most_specific(e) {
            for &d in expected {
                best = best.max(hierarchy.wu_palmer(c, d));
            }
        }
        best
    };
    let head = side(candidate.h, schema.signature.domain(query.r));
    let tail = side(candidate.t, schema.signature.range(query.r));
    Ok(head.min(tail))
}

/// Extensional compatibility: the candidate head (tail) has been observed as a
/// head (tail) of `query.r` in the profile's source triples.
pub fn compatibility_ext(query: &Triple, candidate: &Triple, profile: &ExtensionalProfile) -> bool {
    profile.is_head_of(candidate.h, query.r) && profile.is_tail_of(candidate.t, query.r)
}
