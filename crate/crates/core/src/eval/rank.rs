use rayon::prelude::*;

use crate::data::{EntityId, ObservedFactIndex, Side, Triple};
use crate::error::{Error, Result};
use crate::models::CandidateScorer;

/// One link prediction query and its outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedQuery {
    pub source: Triple,
    pub side: Side,
    /// Realistic rank: `1 + #better + #ties / 2`.
    pub rank: f64,
    /// Best surviving candidates, descending score, ties by ascending id.
    pub top_k: Vec<EntityId>,
}

impl RankedQuery {
    /// The candidate triple obtained by substituting `e` on the hidden side.
    pub fn candidate(&self, e: EntityId) -> Triple {
        self.source.with_entity(self.side, e)
    }
}

fn describe(query: &Triple, side: Side) -> String {
    match side {
        Side::Head => format!("(?, {}, {})", query.r, query.t),
        Side::Tail => format!("({}, {}, ?)", query.h, query.r),
    }
}

/// Ranks the ground truth `query.entity(side)` among `scores`, skipping every
/// entity listed in `filtered` (sorted ascending) except the ground truth.
pub fn rank_scores(
    scores: &[f64],
    query: &Triple,
    side: Side,
    filtered: &[EntityId],
    k: usize,
) -> Result<RankedQuery> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let gt = query.entity(side);
    let target = *scores.get(gt).ok_or_else(|| {
        Error::Lookup(format!("ground truth {gt} outside {} candidate scores", scores.len()))
    })?;
    let mut better = 0usize;
    let mut ties = 0usize;
    // (score, id), kept sorted best-first; at most k entries.
    let mut top: Vec<(f64, EntityId)> = Vec::with_capacity(k + 1);
    let mut survivors = 0usize;
    let mut skip = filtered.iter().peekable();
    for (e, &s) in scores.iter().enumerate() {
        while skip.next_if(|&&f| f < e).is_some() {}
        if e != gt && skip.next_if_eq(&&e).is_some() {
            continue;
        }
        survivors += 1;
        if e != gt {
            if s > target {
                better += 1;
            } else if s == target {
                ties += 1;
            }
        }
        // Ids arrive in ascending order, so on equal scores the earlier entry wins.
        if top.len() < k || s > top[top.len() - 1].0 {
            let pos = top.partition_point(|&(ts, _)| ts >= s);
            top.insert(pos, (s, e));
            top.truncate(k);
        }
    }
    if survivors < k {
        return Err(Error::Evaluation(format!(
            "query {} has {survivors} unfiltered candidates, fewer than K = {k}",
            describe(query, side)
        )));
    }
    Ok(RankedQuery {
        source: *query,
        side,
        rank: 1.0 + better as f64 + ties as f64 / 2.0,
        top_k: top.into_iter().map(|(_, e)| e).collect(),
    })
}

/// Entities to filter for a query: every known answer of the partial triple.
pub fn filter_set<'a>(index: &'a ObservedFactIndex, query: &Triple, side: Side) -> &'a [EntityId] {
    match side {
        Side::Head => index.heads_of(query.r, query.t),
        Side::Tail => index.tails_of(query.h, query.r),
    }
}

/// Scores every candidate for the hidden `side` of `query` and ranks the
/// ground truth. With `index = None` nothing is filtered (raw setting).
pub fn rank_and_topk<S: CandidateScorer + ?Sized>(
    scorer: &S,
    query: &Triple,
    side: Side,
    index: Option<&ObservedFactIndex>,
    k: usize,
) -> Result<RankedQuery> {
    let mut scores = vec![0.0; scorer.num_entities()];
    rank_into(scorer, query, side, index, k, &mut scores)
}

fn rank_into<S: CandidateScorer + ?Sized>(
    scorer: &S,
    query: &Triple,
    side: Side,
    index: Option<&ObservedFactIndex>,
    k: usize,
    scores: &mut [f64],
) -> Result<RankedQuery> {
    scorer.score_candidates(query, side, scores)?;
    let filtered = index.map_or(&[][..], |ix| filter_set(ix, query, side));
    rank_scores(scores, query, side, filtered, k)
}

/// Head query then tail query for every triple, in split order.
pub fn rank_split<S: CandidateScorer + ?Sized>(
    scorer: &S,
    split: &[Triple],
    index: Option<&ObservedFactIndex>,
    k: usize,
) -> Result<Vec<RankedQuery>> {
    let n = scorer.num_entities();
    (0..split.len() * 2)
        .into_par_iter()
        .map_init(
            || vec![0.0; n],
            |buf, q| {
                let side = if q % 2 == 0 { Side::Head } else { Side::Tail };
                rank_into(scorer, &split[q / 2], side, index, k, buf)
            },
        )
        .collect()
}
