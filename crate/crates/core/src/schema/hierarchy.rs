use std::collections::VecDeque;

use crate::error::{Error, Result};

pub type ClassId = usize;

/// Rooted DAG of `subClassOf` edges.
///
/// For every class the shortest upward distance to each of its ancestors is
/// precomputed, which makes closures and Wu-Palmer lookups cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassHierarchy {
    parents: Vec<Vec<ClassId>>,
    root: ClassId,
    /// `(ancestor, edges)` pairs sorted by ancestor id; includes `(c, 0)`.
    ancestors: Vec<Vec<(ClassId, u32)>>,
}

impl ClassHierarchy {
    /// Builds and validates a hierarchy over classes `0..num_classes` from
    /// `(subclass, superclass)` edges. When `root` is `None` the unique
    /// parentless class is used.
    pub fn new(num_classes: usize, edges: &[(ClassId, ClassId)], root: Option<ClassId>) -> Result<Self> {
        Self::with_names(num_classes, edges, root, |c| c.to_string())
    }

    /// Like [`ClassHierarchy::new`], naming classes with `name` in error messages.
    pub fn with_names(
        num_classes: usize,
        edges: &[(ClassId, ClassId)],
        root: Option<ClassId>,
        name: impl Fn(ClassId) -> String,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::Schema("class hierarchy is empty".into()));
        }
        let mut parents = vec![Vec::new(); num_classes];
        for &(sub, sup) in edges {
            if sub >= num_classes || sup >= num_classes {
                return Err(Error::Schema(format!("edge ({sub}, {sup}) references an unknown class")));
            }
            parents[sub].push(sup);
        }
        for p in &mut parents {
            p.sort_unstable();
            p.dedup();
        }

        if let Some(member) = find_cycle_member(&parents) {
            return Err(Error::Schema(format!("subclass cycle through class {}", name(member))));
        }

        let root = match root {
            Some(r) if r >= num_classes => {
                return Err(Error::Schema(format!("root class {r} is out of range")))
            }
            Some(r) if !parents[r].is_empty() => {
                return Err(Error::Schema(format!("root class {} has superclasses", name(r))))
            }
            Some(r) => r,
            None => {
                let parentless: Vec<ClassId> = (0..num_classes).filter(|&c| parents[c].is_empty()).collect();
                match parentless.as_slice() {
                    [r] => *r,
                    _ => {
                        return Err(Error::Schema(format!(
                            "cannot infer a unique root: classes [{}] have no superclass",
                            parentless.iter().map(|&c| name(c)).collect::<Vec<_>>().join(", ")
                        )))
                    }
                }
            }
        };

        let ancestors: Vec<Vec<(ClassId, u32)>> = (0..num_classes).map(|c| upward_bfs(&parents, c)).collect();
        for (c, anc) in ancestors.iter().enumerate() {
            if anc.binary_search_by_key(&root, |&(a, _)| a).is_err() {
                return Err(Error::Schema(format!("class {} is unreachable from the root", name(c))));
            }
        }

        Ok(ClassHierarchy { parents, root, ancestors })
    }

    pub fn root(&self) -> ClassId {
        self.root
    }

    pub fn num_classes(&self) -> usize {
        self.parents.len()
    }

    pub fn contains(&self, c: ClassId) -> bool {
        c < self.parents.len()
    }

    pub fn parents(&self, c: ClassId) -> &[ClassId] {
        &self.parents[c]
    }

    /// `(subclass, superclass)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (ClassId, ClassId)> + '_ {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (c, p)))
    }

    /// Shortest number of parent edges from `c` up to `ancestor`, if it is one.
    pub fn distance(&self, c: ClassId, ancestor: ClassId) -> Option<u32> {
        let anc = &self.ancestors[c];
        anc.binary_search_by_key(&ancestor, |&(a, _)| a)
            .ok()
            .map(|i| anc[i].1)
    }

    /// δ(c, ρ).
    pub fn depth(&self, c: ClassId) -> u32 {
        self.distance(c, self.root).expect("validated hierarchy reaches root")
    }

    /// `c` plus all of its ancestors, sorted ascending.
    pub fn closure(&self, c: ClassId) -> Result<Vec<ClassId>> {
        self.ancestors
            .get(c)
            .map(|anc| anc.iter().map(|&(a, _)| a).collect())
            .ok_or_else(|| Error::Lookup(format!("unknown class {c}")))
    }

    /// True if `ancestor` is reachable from `c` by one or more parent edges.
    pub fn is_strict_ancestor(&self, ancestor: ClassId, c: ClassId) -> bool {
        ancestor != c && self.distance(c, ancestor).is_some()
    }

    /// Wu-Palmer similarity `2·δ(a,ρ) / (δ(c,a) + δ(c',a) + 2·δ(a,ρ))`, maximised
    /// over the common ancestors `a` of both classes.
    ///
    /// Identical classes score 1, including the root with itself.
    pub fn wu_palmer(&self, c: ClassId, other: ClassId) -> f64 {
        if c == other {
            return 1.0;
        }
        let (xs, ys) = (&self.ancestors[c], &self.ancestors[other]);
        let (mut i, mut j) = (0, 0);
        let mut best = 0.0_f64;
        while i < xs.len() && j < ys.len() {
            let (a, da) = xs[i];
            let (b, db) = ys[j];
            if a < b {
                i += 1;
            } else if b < a {
                j += 1;
            } else {
                let depth = 2.0 * f64::from(self.depth(a));
                let denom = f64::from(da) + f64::from(db) + depth;
                if denom > 0.0 {
                    best = best.max(depth / denom);
                }
                i += 1;
                j += 1;
            }
        }
        best
    }
}

fn upward_bfs(parents: &[Vec<ClassId>], start: ClassId) -> Vec<(ClassId, u32)> {
    let mut dist = vec![u32::MAX; parents.len()];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for &p in &parents[c] {
            if dist[p] == u32::MAX {
                dist[p] = dist[c] + 1;
                queue.push_back(p);
            }
        }
    }
    dist.iter()
        .enumerate()
        .filter(|(_, &d)| d != u32::MAX)
        .map(|(c, &d)| (c, d))
        .collect()
}

/// Iterative three-colour DFS; returns some class lying on a cycle.
fn find_cycle_member(parents: &[Vec<ClassId>]) -> Option<ClassId> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; parents.len()];
    for start in 0..parents.len() {
        if mark[start] != Mark::New {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            if let Some(&p) = parents[node].get(*next) {
                *next += 1;
                match mark[p] {
                    Mark::Open => return Some(p),
                    Mark::New => {
                        mark[p] = Mark::Open;
                        stack.push((p, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[node] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

pub fn class_closure(c: ClassId, hierarchy: &ClassHierarchy) -> Result<Vec<ClassId>> {
    hierarchy.closure(c)
}

pub fn wu_palmer(c: ClassId, other: ClassId, hierarchy: &ClassHierarchy) -> f64 {
    hierarchy.wu_palmer(c, other)
}
