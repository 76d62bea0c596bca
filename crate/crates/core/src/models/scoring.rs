use super::{Matrix, ModelKind, ModelParameters, Norm};
use crate::data::{Side, Triple};
use crate::error::{Error, Result};

#[inline]
fn trilinear(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a.iter().zip(b).zip(c).map(|((x, y), z)| x * y * z).sum()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(v: impl Iterator<Item = f64>, kind: Norm) -> f64 {
    match kind {
        Norm::L1 => v.map(f64::abs).sum(),
        Norm::L2 => v.map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// `x − (wᵀx) w`
fn project(x: &[f64], w: &[f64]) -> Vec<f64> {
    let a = dot(w, x);
    x.iter().zip(w).map(|(xi, wi)| xi - a * wi).collect()
}

fn score_unchecked(p: &ModelParameters, q: &Triple) -> f64 {
    let e = &p.entity;
    let r = &p.relation;
    match p.kind {
        ModelKind::TransE => {
            let (h, rv, t) = (e[0].row(q.h), r[0].row(q.r), e[0].row(q.t));
            -norm((0..p.dim).map(|i| h[i] + rv[i] - t[i]), p.norm)
        }
        ModelKind::TransH => {
            let (d, w) = (r[0].row(q.r), r[1].row(q.r));
            let hp = project(e[0].row(q.h), w);
            let tp = project(e[0].row(q.t), w);
            -norm((0..p.dim).map(|i| hp[i] + d[i] - tp[i]), p.norm)
        }
        ModelKind::DistMult => trilinear(e[0].row(q.h), r[0].row(q.r), e[0].row(q.t)),
        ModelKind::ComplEx => {
            let (hr, hi) = (e[0].row(q.h), e[1].row(q.h));
            let (rr, ri) = (r[0].row(q.r), r[1].row(q.r));
            let (tr, ti) = (e[0].row(q.t), e[1].row(q.t));
            trilinear(hr, rr, tr) + trilinear(hi, rr, ti) + trilinear(hr, ri, ti) - trilinear(hi, ri, tr)
        }
        ModelKind::SimplE => {
            let forward = trilinear(e[0].row(q.h), r[0].row(q.r), e[1].row(q.t));
            let inverse = trilinear(e[0].row(q.t), r[1].row(q.r), e[1].row(q.h));
            0.5 * (forward + inverse)
        }
    }
}

fn check_ids(p: &ModelParameters, q: &Triple) -> Result<()> {
    if q.h >= p.num_entities() || q.t >= p.num_entities() || q.r >= p.num_relations() {
        return Err(Error::Lookup(format!("triple {q:?} is outside the parameter tables")));
    }
    Ok(())
}

/// Plausibility of a single triple (higher is more plausible).
pub fn score(params: &ModelParameters, triple: &Triple) -> Result<f64> {
    check_ids(params, triple)?;
    let s = score_unchecked(params, triple);
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::Numeric(format!("non-finite score for triple {triple:?}")))
    }
}

pub(crate) fn score_raw(params: &ModelParameters, triple: &Triple) -> f64 {
    score_unchecked(params, triple)
}

/// Anything able to score every entity as the hidden side of a query.
pub trait CandidateScorer: Sync {
    fn num_entities(&self) -> usize;

    /// Writes into `out[e]` the score of `query` with its `side` entity replaced by `e`.
    fn score_candidates(&self, query: &Triple, side: Side, out: &mut [f64]) -> Result<()>;
}

impl CandidateScorer for ModelParameters {
    fn num_entities(&self) -> usize {
        ModelParameters::num_entities(self)
    }

    fn score_candidates(&self, query: &Triple, side: Side, out: &mut [f64]) -> Result<()> {
        score_candidates_into(self, query, side, out)
    }
}

/// Scores of all |E| candidates for the hidden `side` of `query`.
pub fn score_candidates(params: &ModelParameters, query: &Triple, side: Side) -> Result<Vec<f64>> {
    let mut out = vec![0.0; params.num_entities()];
    score_candidates_into(params, query, side, &mut out)?;
    Ok(out)
}

/// Row-wise `out[i] = -‖x_i − q‖` over a table.
fn neg_distances(table: &Matrix, q: &[f64], kind: Norm, out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let x = table.row(i);
        *o = -norm(x.iter().zip(q).map(|(a, b)| a - b), kind);
    }
}

fn dots(table: &Matrix, q: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(table.row(i), q);
    }
}

fn score_candidates_into(p: &ModelParameters, query: &Triple, side: Side, out: &mut [f64]) -> Result<()> {
    check_ids(p, query)?;
    let n = p.num_entities();
    if out.len() != n {
        return Err(Error::Lookup(format!("output buffer has {} slots for {n} entities", out.len())));
    }
    let e = &p.entity;
    let r = &p.relation;
    let d = p.dim;
    match (p.kind, side) {
        (ModelKind::TransE, Side::Tail) => {
            let (h, rv) = (e[0].row(query.h), r[0].row(query.r));
            let q: Vec<f64> = (0..d).map(|i| h[i] + rv[i]).collect();
            neg_distances(&e[0], &q, p.norm, out);
        }
        (ModelKind::TransE, Side::Head) => {
            let (rv, t) = (r[0].row(query.r), e[0].row(query.t));
            let q: Vec<f64> = (0..d).map(|i| t[i] - rv[i]).collect();
            neg_distances(&e[0], &q, p.norm, out);
        }
        (ModelKind::TransH, _) => {
            let (dr, w) = (r[0].row(query.r), r[1].row(query.r));
            let q: Vec<f64> = match side {
                Side::Tail => {
                    let hp = project(e[0].row(query.h), w);
                    (0..d).map(|i| hp[i] + dr[i]).collect()
                }
                Side::Head => {
                    let tp = project(e[0].row(query.t), w);
                    (0..d).map(|i| tp[i] - dr[i]).collect()
                }
            };
            for (i, o) in out.iter_mut().enumerate() {
                let x = e[0].row(i);
                let a = dot(w, x);
                *o = -norm((0..d).map(|j| x[j] - a * w[j] - q[j]), p.norm);
            }
        }
        (ModelKind::DistMult, Side::Tail) => {
            let (h, rv) = (e[0].row(query.h), r[0].row(query.r));
            let q: Vec<f64> = (0..d).map(|i| h[i] * rv[i]).collect();
            dots(&e[0], &q, out);
        }
        (ModelKind::DistMult, Side::Head) => {
            let (rv, t) = (r[0].row(query.r), e[0].row(query.t));
            let q: Vec<f64> = (0..d).map(|i| rv[i] * t[i]).collect();
            dots(&e[0], &q, out);
        }
        (ModelKind::ComplEx, Side::Tail) => {
            // Re(h r conj(t)) = Re(h r)·Re(t) + Im(h r)·Im(t)
            let (hr, hi) = (e[0].row(query.h), e[1].row(query.h));
            let (rr, ri) = (r[0].row(query.r), r[1].row(query.r));
            let re: Vec<f64> = (0..d).map(|i| hr[i] * rr[i] - hi[i] * ri[i]).collect();
            let im: Vec<f64> = (0..d).map(|i| hr[i] * ri[i] + hi[i] * rr[i]).collect();
            for (j, o) in out.iter_mut().enumerate() {
                *o = dot(e[0].row(j), &re) + dot(e[1].row(j), &im);
            }
        }
        (ModelKind::ComplEx, Side::Head) => {
            // Re(h · r conj(t)) = Re(h)·Re(r conj t) − Im(h)·Im(r conj t)
            let (rr, ri) = (r[0].row(query.r), r[1].row(query.r));
            let (tr, ti) = (e[0].row(query.t), e[1].row(query.t));
            let re: Vec<f64> = (0..d).map(|i| rr[i] * tr[i] + ri[i] * ti[i]).collect();
            let im: Vec<f64> = (0..d).map(|i| ri[i] * tr[i] - rr[i] * ti[i]).collect();
            for (j, o) in out.iter_mut().enumerate() {
                *o = dot(e[0].row(j), &re) - dot(e[1].row(j), &im);
            }
        }
        (ModelKind::SimplE, Side::Tail) => {
            let (hh, ht) = (e[0].row(query.h), e[1].row(query.h));
            let (rf, rinv) = (r[0].row(query.r), r[1].row(query.r));
            let q_fwd: Vec<f64> = (0..d).map(|i| hh[i] * rf[i]).collect();
            let q_inv: Vec<f64> = (0..d).map(|i| rinv[i] * ht[i]).collect();
            for (j, o) in out.iter_mut().enumerate() {
                *o = 0.5 * (dot(e[1].row(j), &q_fwd) + dot(e[0].row(j), &q_inv));
            }
        }
        (ModelKind::SimplE, Side::Head) => {
            let (th, tt) = (e[0].row(query.t), e[1].row(query.t));
            let (rf, rinv) = (r[0].row(query.r), r[1].row(query.r));
            let q_fwd: Vec<f64> = (0..d).map(|i| rf[i] * tt[i]).collect();
            let q_inv: Vec<f64> = (0..d).map(|i| th[i] * rinv[i]).collect();
            for (j, o) in out.iter_mut().enumerate() {
                *o = 0.5 * (dot(e[0].row(j), &q_fwd) + dot(e[1].row(j), &q_inv));
            }
        }
    }
    if let Some(i) = out.iter().position(|s| !s.is_finite()) {
        return Err(Error::Numeric(format!(
            "non-finite score for candidate {i} of query {query:?}"
        )));
    }
    Ok(())
}
