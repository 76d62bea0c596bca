//! Filtered link prediction ranking, rank-based metrics and Sem@K.

mod rank;
mod report;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::{ObservedFactIndex, Triple};
use crate::error::{Error, Result};
use crate::models::CandidateScorer;
use crate::schema::{compatibility_base, compatibility_ext, compatibility_wup, ExtensionalProfile, Schema};

pub use rank::{filter_set, rank_and_topk, rank_scores, rank_split, RankedQuery};
pub use report::{metrics_csv_header, metrics_csv_values, write_report, EvaluationReport};

/// Compatibility regime of Sem@K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Base,
    Ext,
    Wup,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Base, Regime::Ext, Regime::Wup];

    pub fn name(self) -> &'static str {
        match self {
            Regime::Base => "base",
            Regime::Ext => "ext",
            Regime::Wup => "wup",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Regime::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown Sem@K regime `{s}` (expected base, ext or wup)")))
    }
}

/// What Sem@K can be computed against. `base` needs a schema, `wup` a schema
/// with a class hierarchy, `ext` a profile.
#[derive(Debug, Clone, Copy, Default)]
pub struct SemanticContext<'a> {
    pub schema: Option<&'a Schema>,
    pub profile: Option<&'a ExtensionalProfile>,
}

impl<'a> SemanticContext<'a> {
    pub fn new(schema: Option<&'a Schema>, profile: Option<&'a ExtensionalProfile>) -> Self {
        SemanticContext { schema, profile }
    }

    /// Fails when `regime` cannot be computed from what is available.
    pub fn check(&self, regime: Regime) -> Result<()> {
        match regime {
            Regime::Base | Regime::Wup if self.schema.is_none() => Err(Error::Config(format!(
                "Sem@K[{regime}] needs a schema (entity types and relation domains/ranges); \
                 a schemaless knowledge graph only supports the ext regime"
            ))),
            Regime::Wup if self.schema.is_some_and(|s| s.hierarchy.is_none()) => Err(Error::Config(
                "Sem@K[wup] needs a class hierarchy; a schema without one only supports base and ext".into(),
            )),
            Regime::Ext if self.profile.is_none() => {
                Err(Error::Config("Sem@K[ext] needs an extensional profile".into()))
            }
            _ => Ok(()),
        }
    }

    /// Regimes computable in this context, in canonical order.
    pub fn available(&self) -> Vec<Regime> {
        Regime::ALL.into_iter().filter(|r| self.check(*r).is_ok()).collect()
    }

    pub fn compatibility(&self, regime: Regime, query: &Triple, candidate: &Triple) -> Result<f64> {
        self.check(regime)?;
        Ok(match regime {
            Regime::Base => f64::from(u8::from(compatibility_base(query, candidate, self.schema.unwrap())?)),
            Regime::Wup => compatibility_wup(query, candidate, self.schema.unwrap())?,
            Regime::Ext => f64::from(u8::from(compatibility_ext(query, candidate, self.profile.unwrap()))),
        })
    }
}

fn non_empty(ranks: &[f64], what: &str) -> Result<()> {
    if ranks.is_empty() {
        Err(Error::Metric(format!("{what} of an empty batch")))
    } else {
        Ok(())
    }
}

pub fn hits_at_k(ranks: &[f64], k: usize) -> Result<f64> {
    non_empty(ranks, "Hits@K")?;
    let hits = ranks.iter().filter(|&&r| r <= k as f64).count();
    Ok(hits as f64 / ranks.len() as f64)
}

pub fn mean_rank(ranks: &[f64]) -> Result<f64> {
    non_empty(ranks, "MR")?;
    Ok(ranks.iter().sum::<f64>() / ranks.len() as f64)
}

pub fn mrr(ranks: &[f64]) -> Result<f64> {
    non_empty(ranks, "MRR")?;
    if let Some(r) = ranks.iter().find(|&&r| r.is_nan() || r < 1.0) {
        return Err(Error::Metric(format!("rank {r} is below 1")));
    }
    Ok(ranks.iter().map(|r| 1.0 / r).sum::<f64>() / ranks.len() as f64)
}

/// Mean over queries of the mean compatibility of the first `k` candidates.
pub fn sem_at_k(queries: &[RankedQuery], k: usize, regime: Regime, ctx: &SemanticContext) -> Result<f64> {
    if queries.is_empty() {
        return Err(Error::Metric("Sem@K of an empty batch".into()));
    }
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    ctx.check(regime)?;
    let mut total = 0.0;
    for q in queries {
        if q.top_k.len() < k {
            return Err(Error::Metric(format!(
                "query {:?} has only {} ranked candidates, fewer than K = {k}",
                q.source,
                q.top_k.len()
            )));
        }
        let mut sum = 0.0;
        for &e in &q.top_k[..k] {
            sum += ctx.compatibility(regime, &q.source, &q.candidate(e))?;
        }
        total += sum / k as f64;
    }
    Ok(total / queries.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mr: f64,
    pub mrr: f64,
    pub hits: BTreeMap<usize, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sem_base: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sem_ext: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sem_wup: Option<BTreeMap<usize, f64>>,
    pub n_queries: usize,
}

impl MetricsReport {
    pub fn sem(&self, regime: Regime) -> Option<&BTreeMap<usize, f64>> {
        match regime {
            Regime::Base => self.sem_base.as_ref(),
            Regime::Ext => self.sem_ext.as_ref(),
            Regime::Wup => self.sem_wup.as_ref(),
        }
    }

    fn sem_mut(&mut self, regime: Regime) -> &mut Option<BTreeMap<usize, f64>> {
        match regime {
            Regime::Base => &mut self.sem_base,
            Regime::Ext => &mut self.sem_ext,
            Regime::Wup => &mut self.sem_wup,
        }
    }

    /// Aggregates already-ranked queries. Each query must carry at least
    /// `max(ks)` candidates.
    pub fn from_queries(queries: &[RankedQuery], ks: &[usize], regimes: &[Regime], ctx: &SemanticContext) -> Result<Self> {
        let ranks: Vec<f64> = queries.iter().map(|q| q.rank).collect();
        let mut report = MetricsReport {
            mr: mean_rank(&ranks)?,
            mrr: mrr(&ranks)?,
            hits: BTreeMap::new(),
            sem_base: None,
            sem_ext: None,
            sem_wup: None,
            n_queries: queries.len(),
        };
        for &k in ks {
            report.hits.insert(k, hits_at_k(&ranks, k)?);
        }
        for &regime in regimes {
            let mut by_k = BTreeMap::new();
            for &k in ks {
                by_k.insert(k, sem_at_k(queries, k, regime, ctx)?);
            }
            *report.sem_mut(regime) = Some(by_k);
        }
        Ok(report)
    }
}

/// What to compute in [`evaluate_split`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub ks: Vec<usize>,
    pub regimes: Vec<Regime>,
    /// Filtered (default) or raw setting.
    #[serde(default = "filtered_default")]
    pub filtered: bool,
}

fn filtered_default() -> bool {
    true
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            ks: vec![1, 3, 10],
            regimes: Regime::ALL.to_vec(),
            filtered: true,
        }
    }
}

impl EvalOptions {
    pub fn validate(&self, ctx: &SemanticContext) -> Result<()> {
        if self.ks.is_empty() || self.ks.contains(&0) {
            return Err(Error::Config("Ks must be a non-empty list of positive integers".into()));
        }
        self.regimes.iter().try_for_each(|r| ctx.check(*r))
    }

    pub fn max_k(&self) -> usize {
        self.ks.iter().copied().max().unwrap_or(1)
    }
}

/// Head and tail prediction for every triple of `split`, aggregated over the
/// `2·|split|` queries.
pub fn evaluate_split<S: CandidateScorer + ?Sized>(
    scorer: &S,
    split: &[Triple],
    index: &ObservedFactIndex,
    ctx: &SemanticContext,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    options.validate(ctx)?;
    if split.is_empty() {
        return Err(Error::Metric("cannot evaluate an empty split".into()));
    }
    let index = options.filtered.then_some(index);
    let queries = rank_split(scorer, split, index, options.max_k())?;
    MetricsReport::from_queries(&queries, &options.ks, &options.regimes, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Side;

    #[test]
    fn motivating_ranks() {
        let ranks = [1.0, 3.0, 4.0];
        assert_eq!(mean_rank(&ranks).unwrap(), 8.0 / 3.0);
        assert_eq!(hits_at_k(&ranks, 1).unwrap(), 1.0 / 3.0);
        assert_eq!(hits_at_k(&ranks, 3).unwrap(), 2.0 / 3.0);
        assert_eq!(hits_at_k(&ranks, 5).unwrap(), 1.0);
        assert!((mrr(&ranks).unwrap() - 19.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn empty_batches_are_errors() {
        assert!(matches!(mean_rank(&[]), Err(Error::Metric(_))));
        assert!(matches!(mrr(&[]), Err(Error::Metric(_))));
        assert!(matches!(hits_at_k(&[], 1), Err(Error::Metric(_))));
        let ctx = SemanticContext::default();
        assert!(matches!(sem_at_k(&[], 1, Regime::Ext, &ctx), Err(Error::Metric(_))));
    }

    #[test]
    fn regime_requirements() {
        let ctx = SemanticContext::default();
        for r in Regime::ALL {
            assert!(matches!(ctx.check(r), Err(Error::Config(_))));
        }
        let profile = ExtensionalProfile::from_triples(&[Triple::new(0, 0, 1)]);
        let ctx = SemanticContext::new(None, Some(&profile));
        assert_eq!(ctx.available(), vec![Regime::Ext]);
        let msg = ctx.check(Regime::Base).unwrap_err().to_string();
        assert!(msg.contains("schemaless"), "{msg}");
    }

    #[test]
    fn sem_of_mixed_top3() {
        // Relation 0 observed with heads {0} and tails {1, 3}.
        let profile = ExtensionalProfile::from_triples(&[Triple::new(0, 0, 1), Triple::new(0, 0, 3)]);
        let ctx = SemanticContext::new(None, Some(&profile));
        let q = RankedQuery {
            source: Triple::new(0, 0, 1),
            side: Side::Tail,
            rank: 1.0,
            top_k: vec![1, 2, 3],
        };
        let s = sem_at_k(&[q], 3, Regime::Ext, &ctx).unwrap();
        assert_eq!(s, 2.0 / 3.0);
    }

    #[test]
    fn regime_names_parse() {
        for r in Regime::ALL {
            assert_eq!(r.name().parse::<Regime>().unwrap(), r);
        }
        assert!("closure".parse::<Regime>().is_err());
    }
}
