//! Brute-force reference implementations and synthetic knowledge graphs shared
//! by the integration tests. Nothing here calls into the ranking, metric,
//! scoring or hierarchy code it is compared against.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use kgsem::models::ModelParameters;
use kgsem::schema::{ClassHierarchy, RelationSignature};
use kgsem::{Dataset, ModelKind, Norm, Regime, Schema, Side, Triple};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

fn row(m: &kgsem::models::Matrix, i: usize) -> Vec<f64> {
    m.row(i).to_vec()
}

fn p_norm(v: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

#[derive(Clone, Copy)]
struct C(f64, f64);

impl C {
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn conj(self) -> C {
        C(self.0, -self.1)
    }
}

/// Plausibility of one triple, straight from the model definitions.
pub fn oracle_score(p: &ModelParameters, t: &Triple) -> f64 {
    let d = p.dim;
    match p.kind {
        ModelKind::TransE => {
            let (h, r, tt) = (row(&p.entity[0], t.h), row(&p.relation[0], t.r), row(&p.entity[0], t.t));
            let v: Vec<f64> = (0..d).map(|i| h[i] + r[i] - tt[i]).collect();
            -p_norm(&v, p.norm)
        }
        ModelKind::TransH => {
            let w = row(&p.relation[1], t.r);
            let dr = row(&p.relation[0], t.r);
            let proj = |x: Vec<f64>| -> Vec<f64> {
                let wx: f64 = (0..d).map(|i| w[i] * x[i]).sum();
                (0..d).map(|i| x[i] - wx * w[i]).collect()
            };
            let hp = proj(row(&p.entity[0], t.h));
            let tp = proj(row(&p.entity[0], t.t));
            let v: Vec<f64> = (0..d).map(|i| hp[i] + dr[i] - tp[i]).collect();
            -p_norm(&v, p.norm)
        }
        ModelKind::DistMult => {
            let (h, r, tt) = (row(&p.entity[0], t.h), row(&p.relation[0], t.r), row(&p.entity[0], t.t));
            (0..d).map(|i| h[i] * r[i] * tt[i]).sum()
        }
        ModelKind::ComplEx => {
            let mut re = 0.0;
            for i in 0..d {
                let h = C(p.entity[0].row(t.h)[i], p.entity[1].row(t.h)[i]);
                let r = C(p.relation[0].row(t.r)[i], p.relation[1].row(t.r)[i]);
                let tt = C(p.entity[0].row(t.t)[i], p.entity[1].row(t.t)[i]);
                re += h.mul(r).mul(tt.conj()).0;
            }
            re
        }
        ModelKind::SimplE => {
            // entity[0]: head-role embeddings, entity[1]: tail-role embeddings.
            let fwd: f64 = (0..d)
                .map(|i| p.entity[0].row(t.h)[i] * p.relation[0].row(t.r)[i] * p.entity[1].row(t.t)[i])
                .sum();
            let inv: f64 = (0..d)
                .map(|i| p.entity[0].row(t.t)[i] * p.relation[1].row(t.r)[i] * p.entity[1].row(t.h)[i])
                .sum();
            0.5 * (fwd + inv)
        }
    }
}

// ---------------------------------------------------------------------------
// Ontology
// ---------------------------------------------------------------------------

/// A schema in plain vectors, with its own closure and Wu-Palmer routines.
#[derive(Debug, Clone)]
pub struct OracleSchema {
    pub num_classes: usize,
    pub root: usize,
    /// `(subclass, superclass)` edges.
    pub edges: Vec<(usize, usize)>,
    pub asserted: Vec<Vec<usize>>,
    pub domain: Vec<Option<Vec<usize>>>,
    pub range: Vec<Option<Vec<usize>>>,
    /// `dist[a][b]`: shortest upward path from `a` to `b`.
    dist: Vec<Vec<Option<u32>>>,
}

impl OracleSchema {
    pub fn new(
        num_classes: usize,
        root: usize,
        edges: Vec<(usize, usize)>,
        asserted: Vec<Vec<usize>>,
        domain: Vec<Option<Vec<usize>>>,
        range: Vec<Option<Vec<usize>>>,
    ) -> Self {
        let dist = floyd_warshall(num_classes, &edges);
        OracleSchema { num_classes, root, edges, asserted, domain, range, dist }
    }

    /// Superclasses reachable from `c`, including `c`, by breadth-first search.
    pub fn closure(&self, c: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([c]);
        let mut queue = VecDeque::from([c]);
        while let Some(x) = queue.pop_front() {
            for &(sub, sup) in &self.edges {
                if sub == x && seen.insert(sup) {
                    queue.push_back(sup);
                }
            }
        }
        seen
    }

    pub fn entity_closure(&self, e: usize) -> BTreeSet<usize> {
        self.asserted[e].iter().flat_map(|&c| self.closure(c)).collect()
    }

    pub fn most_specific(&self, e: usize) -> Vec<usize> {
        let a = &self.asserted[e];
        a.iter()
            .copied()
            .filter(|&c| !a.iter().any(|&d| d != c && self.closure(d).contains(&c)))
            .collect()
    }

    pub fn distance(&self, from: usize, to: usize) -> Option<u32> {
        self.dist[from][to]
    }

    pub fn wu_palmer(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        let mut best = 0.0_f64;
        for anc in 0..self.num_classes {
            if let (Some(da), Some(db), Some(depth)) = (self.dist[a][anc], self.dist[b][anc], self.dist[anc][self.root]) {
                let num = 2.0 * f64::from(depth);
                let den = f64::from(da) + f64::from(db) + num;
                if den > 0.0 {
                    best = best.max(num / den);
                }
            }
        }
        best
    }

    pub fn compat_base(&self, r: usize, h: usize, t: usize) -> f64 {
        let meets = |e: usize, sig: &Option<Vec<usize>>| match sig {
            None => true,
            Some(classes) => {
                let cl = self.entity_closure(e);
                classes.iter().any(|c| cl.contains(c))
            }
        };
        if meets(h, &self.domain[r]) && meets(t, &self.range[r]) {
            1.0
        } else {
            0.0
        }
    }

    pub fn compat_wup(&self, r: usize, h: usize, t: usize) -> f64 {
        let side = |e: usize, sig: &Option<Vec<usize>>| match sig {
            None => 1.0,
            Some(classes) => {
                let mut best = 0.0_f64;
                for c in self.most_specific(e) {
                    for &d in classes {
                        best = best.max(self.wu_palmer(c, d));
                    }
                }
                best
            }
        };
        side(h, &self.domain[r]).min(side(t, &self.range[r]))
    }

    pub fn to_schema(&self) -> Schema {
        let hierarchy = ClassHierarchy::new(self.num_classes, &self.edges, Some(self.root)).unwrap();
        Schema::new(
            Some(hierarchy),
            self.asserted.clone(),
            RelationSignature::new(self.domain.clone(), self.range.clone()),
        )
        .unwrap()
    }
}

fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<Option<u32>>> {
    let mut d = vec![vec![None; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = Some(0);
    }
    for &(a, b) in edges {
        if a != b {
            d[a][b] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|cur| x + y < cur) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

pub fn compat_ext(train: &[Triple], r: usize, h: usize, t: usize) -> f64 {
    let head = train.iter().any(|x| x.r == r && x.h == h);
    let tail = train.iter().any(|x| x.r == r && x.t == t);
    if head && tail {
        1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

pub struct OracleQuery {
    pub triple: Triple,
    pub side: Side,
    pub rank: f64,
    pub survivors: usize,
    pub top: Vec<usize>,
}

fn substitute(t: &Triple, side: Side, e: usize) -> Triple {
    match side {
        Side::Head => Triple::new(e, t.r, t.t),
        Side::Tail => Triple::new(t.h, t.r, e),
    }
}

/// Scores every entity, sorts, drops known answers other than the ground
/// truth, and reads the realistic rank off the sorted list as the mean of the
/// optimistic and pessimistic positions.
pub fn oracle_query(
    scores: &[f64],
    triple: &Triple,
    side: Side,
    known: &[Triple],
    k: usize,
) -> OracleQuery {
    let gt = match side {
        Side::Head => triple.h,
        Side::Tail => triple.t,
    };
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&e| e == gt || !known.contains(&substitute(triple, side, e)))
        .collect();
    let s = scores[gt];
    let first = kept.iter().position(|&e| scores[e] == s).unwrap();
    let last = kept.iter().rposition(|&e| scores[e] == s).unwrap();
    OracleQuery {
        triple: *triple,
        side,
        rank: 1.0 + (first + last) as f64 / 2.0,
        survivors: kept.len(),
        top: kept.into_iter().take(k).collect(),
    }
}

pub fn oracle_queries(
    score_all: impl Fn(&Triple, Side) -> Vec<f64>,
    split: &[Triple],
    known: &[Triple],
    k: usize,
) -> Vec<OracleQuery> {
    let mut out = Vec::new();
    for t in split {
        for side in [Side::Head, Side::Tail] {
            out.push(oracle_query(&score_all(t, side), t, side, known, k));
        }
    }
    out
}

pub fn model_scores(p: &ModelParameters) -> impl Fn(&Triple, Side) -> Vec<f64> + '_ {
    move |t, side| {
        (0..p.entity[0].rows())
            .map(|e| oracle_score(p, &substitute(t, side, e)))
            .collect()
    }
}

pub struct OracleMetrics {
    pub mr: f64,
    pub mrr: f64,
    pub hits: Vec<f64>,
    /// `sem[regime index][k index]`, regimes in [`Regime::ALL`] order.
    pub sem: Vec<Vec<f64>>,
}

pub fn oracle_metrics(
    queries: &[OracleQuery],
    ks: &[usize],
    schema: Option<&OracleSchema>,
    train: &[Triple],
) -> OracleMetrics {
    let n = queries.len() as f64;
    let mr = queries.iter().map(|q| q.rank).sum::<f64>() / n;
    let mrr = queries.iter().map(|q| 1.0 / q.rank).sum::<f64>() / n;
    let hits = ks
        .iter()
        .map(|&k| queries.iter().filter(|q| q.rank <= k as f64).count() as f64 / n)
        .collect();
    let sem = Regime::ALL
        .iter()
        .map(|&regime| {
            ks.iter()
                .map(|&k| {
                    let mut total = 0.0;
                    for q in queries {
                        let mut s = 0.0;
                        for &e in &q.top[..k] {
                            let c = substitute(&q.triple, q.side, e);
                            s += match regime {
                                Regime::Base => schema.map_or(f64::NAN, |o| o.compat_base(c.r, c.h, c.t)),
                                Regime::Wup => schema.map_or(f64::NAN, |o| o.compat_wup(c.r, c.h, c.t)),
                                Regime::Ext => compat_ext(train, c.r, c.h, c.t),
                            };
                        }
                        total += s / k as f64;
                    }
                    total / n
                })
                .collect()
        })
        .collect();
    OracleMetrics { mr, mrr, hits, sem }
}

// ---------------------------------------------------------------------------
// Synthetic graphs
// ---------------------------------------------------------------------------

/// Random rooted DAG over `n` classes with root 0: every other class gets one
/// or two parents among the classes before it.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for c in 1..n {
        let k = if c > 1 && rng.gen_bool(0.35) { 2 } else { 1 };
        let mut parents: Vec<usize> = (0..c).collect();
        parents.shuffle(rng);
        for &p in parents.iter().take(k) {
            edges.push((c, p));
        }
    }
    edges
}

pub struct SynthKg {
    pub dataset: Dataset,
    pub oracle: OracleSchema,
    pub schema: Schema,
}

impl SynthKg {
    pub fn known(&self) -> Vec<Triple> {
        self.dataset.all_triples().copied().collect()
    }
}

/// Dataset over entities `0..n_e` and relations `0..n_r` with the given splits.
pub fn dataset_from(n_e: usize, n_r: usize, train: Vec<Triple>, valid: Vec<Triple>, test: Vec<Triple>) -> Dataset {
    let mut d = Dataset::default();
    for e in 0..n_e {
        d.vocab.entities.intern(&format!("e{e}"));
    }
    for r in 0..n_r {
        d.vocab.relations.intern(&format!("r{r}"));
    }
    d.train = train;
    d.valid = valid;
    d.test = test;
    d.validate().unwrap();
    d
}

fn name_classes(d: &mut Dataset, n_c: usize) {
    for c in 0..n_c {
        d.vocab.classes.intern(&format!("C{c}"));
    }
}

/// At most 50 entities, 5 relations and 8 classes; every entity typed, some
/// signature sides undeclared. Every query keeps at least 10 unfiltered
/// candidates.
pub fn random_kg<R: Rng>(rng: &mut R) -> SynthKg {
    loop {
        let n_e = rng.gen_range(15..=50);
        let n_r = rng.gen_range(1..=5);
        let n_c = rng.gen_range(2..=8);
        let edges = random_dag(rng, n_c);
        let asserted: Vec<Vec<usize>> = (0..n_e)
            .map(|_| {
                let k = rng.gen_range(1..=2);
                (0..k).map(|_| rng.gen_range(0..n_c)).collect()
            })
            .collect();
        let mut sig = || -> Option<Vec<usize>> {
            if rng.gen_bool(0.2) {
                None
            } else {
                let k = rng.gen_range(1..=2);
                Some((0..k).map(|_| rng.gen_range(0..n_c)).collect())
            }
        };
        let domain: Vec<_> = (0..n_r).map(|_| sig()).collect();
        let range: Vec<_> = (0..n_r).map(|_| sig()).collect();

        let mut triples = BTreeSet::new();
        let target = rng.gen_range(n_e..=3 * n_e);
        while triples.len() < target {
            triples.insert(Triple::new(rng.gen_range(0..n_e), rng.gen_range(0..n_r), rng.gen_range(0..n_e)));
        }
        let mut all: Vec<Triple> = triples.into_iter().collect();
        all.shuffle(rng);
        let n_test = (all.len() / 10).max(1);
        let test = all.split_off(all.len() - n_test);
        let valid = all.split_off(all.len() - n_test);
        let dataset = dataset_from(n_e, n_r, all, valid, test);

        let known: Vec<Triple> = dataset.all_triples().copied().collect();
        let enough = dataset.test.iter().all(|t| {
            let heads = known.iter().filter(|x| x.r == t.r && x.t == t.t).count();
            let tails = known.iter().filter(|x| x.r == t.r && x.h == t.h).count();
            n_e + 1 - heads >= 10 && n_e + 1 - tails >= 10
        });
        if !enough {
            continue;
        }
        let oracle = OracleSchema::new(n_c, 0, edges, asserted, domain, range);
        let schema = oracle.to_schema();
        let mut dataset = dataset;
        name_classes(&mut dataset, n_c);
        return SynthKg { dataset, oracle, schema };
    }
}

/// Block-structured graph: `blocks` blocks of `per_block` entities, one
/// class per block under a common root, each block cut into `groups` equal
/// groups. Block `b` heads `rels` relations; relation `b * rels + j` points
/// into block `(b + 1 + j) % blocks`, and a head in group `g` gets `fanout`
/// random tails from group `g` of the target block. Split 80/10/10.
pub struct BlockSpec {
    pub blocks: usize,
    pub per_block: usize,
    pub groups: usize,
    pub rels: usize,
    pub fanout: usize,
    /// Zipf exponent of tail popularity inside a group; 0 is uniform.
    pub skew: f64,
}

pub fn block_kg<R: Rng>(rng: &mut R, spec: &BlockSpec) -> SynthKg {
    let &BlockSpec { blocks, per_block, groups, rels, fanout, skew } = spec;
    let n_e = blocks * per_block;
    let n_r = blocks * rels;
    let size = per_block / groups;
    assert!(size * groups == per_block && fanout <= size && rels < blocks);
    let target = |r: usize| (r / rels + 1 + r % rels) % blocks;
    let mut triples = Vec::new();
    for r in 0..n_r {
        let (head_block, tail_block) = (r / rels, target(r));
        for i in 0..per_block {
            let h = head_block * per_block + i;
            let g = i / size;
            let members: Vec<usize> = (0..size).map(|j| tail_block * per_block + g * size + j).collect();
            let tails = members
                .choose_multiple_weighted(rng, fanout, |&t| 1.0 / ((t % size) as f64 + 1.0).powf(skew))
                .unwrap();
            for &t in tails {
                triples.push(Triple::new(h, r, t));
            }
        }
    }
    triples.shuffle(rng);
    let n_hold = triples.len() / 10;
    let test = triples.split_off(triples.len() - n_hold);
    let valid = triples.split_off(triples.len() - n_hold);
    let dataset = dataset_from(n_e, n_r, triples, valid, test);

    let edges: Vec<(usize, usize)> = (1..=blocks).map(|c| (c, 0)).collect();
    let asserted = (0..n_e).map(|e| vec![1 + e / per_block]).collect();
    let domain = (0..n_r).map(|r| Some(vec![1 + r / rels])).collect();
    let range = (0..n_r).map(|r| Some(vec![1 + target(r)])).collect();
    let oracle = OracleSchema::new(blocks + 1, 0, edges, asserted, domain, range);
    let schema = oracle.to_schema();
    let mut dataset = dataset;
    name_classes(&mut dataset, blocks + 1);
    SynthKg { dataset, oracle, schema }
}
