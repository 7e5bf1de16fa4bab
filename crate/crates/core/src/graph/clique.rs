//! Clique searches: maximal-clique enumeration (Bron-Kerbosch with pivoting)
//! and exact maximum-weight clique (Östergård-style suffix bounds).
//!
//! Max-weight ties are broken towards the lexicographically smallest sorted
//! vertex list. Within one round (cliques whose smallest vertex is `i`) the
//! depth-first search visits cliques in lexicographic order, so the first
//! clique reaching the best weight in a round is the smallest of that round,
//! and rounds run from the last vertex down to vertex 0.

use std::ops::Add;

use fixedbitset::FixedBitSet;
use num_traits::Zero;
use serde::Serialize;

use super::Graph;
use crate::error::{resource_limit, Error, Result};

pub const DEFAULT_CLIQUE_OUTPUT_CAP: usize = 1 << 20;

/// Weights usable by the exact clique search.
pub trait CliqueWeight: Clone + Ord + Zero + Add<Output = Self> {}
impl<T: Clone + Ord + Zero + Add<Output = T>> CliqueWeight for T {}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Clique {
    vertices: Vec<usize>,
}

impl Clique {
    /// Checks strict ordering, range and pairwise adjacency in `g`.
    pub fn new(g: &Graph, vertices: Vec<usize>) -> Result<Self> {
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("clique vertices must be strictly increasing".into()));
        }
        if let Some(&v) = vertices.last() {
            if v >= g.n() {
                return Err(Error::InvalidArgument(format!("vertex {v} out of range")));
            }
        }
        for (a, &u) in vertices.iter().enumerate() {
            for &v in &vertices[a + 1..] {
                if !g.has_edge(u, v) {
                    return Err(Error::InvalidArgument(format!("vertices {u} and {v} are not adjacent")));
                }
            }
        }
        Ok(Clique { vertices })
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// No vertex outside the clique is adjacent to all of it.
    pub fn is_maximal(&self, g: &Graph) -> bool {
        let mut common = FixedBitSet::with_capacity(g.n());
        common.insert_range(..);
        for &v in &self.vertices {
            common.intersect_with(g.neighbors(v));
        }
        common.is_clear()
    }

    pub fn weight<W: CliqueWeight>(&self, w: &[W]) -> W {
        self.vertices.iter().fold(W::zero(), |acc, &v| acc + w[v].clone())
    }

    /// Greedily adds the smallest vertex adjacent to the whole clique until
    /// the clique is maximal.
    pub fn extend_to_maximal(&self, g: &Graph) -> Clique {
        let mut common = FixedBitSet::with_capacity(g.n());
        common.insert_range(..);
        for &v in &self.vertices {
            common.intersect_with(g.neighbors(v));
        }
        let mut vs = self.vertices.clone();
        while let Some(v) = common.ones().next() {
            vs.push(v);
            common.intersect_with(g.neighbors(v));
        }
        vs.sort_unstable();
        Clique { vertices: vs }
    }
}

pub fn enumerate_maximal_cliques(g: &Graph) -> Result<Vec<Clique>> {
    enumerate_maximal_cliques_capped(g, DEFAULT_CLIQUE_OUTPUT_CAP)
}

/// Every maximal clique once, sorted lexicographically. Exceeding `cap`
/// output cliques is a resource-limit error.
pub fn enumerate_maximal_cliques_capped(g: &Graph, cap: usize) -> Result<Vec<Clique>> {
    let n = g.n();
    let mut out = Vec::new();
    if n == 0 {
        return Ok(out);
    }
    let mut p = FixedBitSet::with_capacity(n);
    p.insert_range(..);
    let x = FixedBitSet::with_capacity(n);
    let mut r = Vec::new();
    bron_kerbosch(g, &mut r, p, x, &mut out, cap)?;
    out.sort_unstable();
    Ok(out)
}

fn bron_kerbosch(
    g: &Graph,
    r: &mut Vec<usize>,
    mut p: FixedBitSet,
    mut x: FixedBitSet,
    out: &mut Vec<Clique>,
    cap: usize,
) -> Result<()> {
    if p.is_clear() {
        if x.is_clear() {
            if out.len() >= cap {
                return Err(resource_limit("maximal cliques", out.len() as u128 + 1, cap));
            }
            let mut c = r.clone();
            c.sort_unstable();
            out.push(Clique { vertices: c });
        }
        return Ok(());
    }
    // Pivot maximizing |P ∩ N(u)| over P ∪ X, smallest index on ties.
    let pivot = p
        .ones()
        .chain(x.ones())
        .max_by_key(|&u| (p.intersection(g.neighbors(u)).count(), std::cmp::Reverse(u)))
        .unwrap();
    let mut branch = p.clone();
    branch.difference_with(g.neighbors(pivot));
    for v in branch.ones() {
        let mut np = p.clone();
        np.intersect_with(g.neighbors(v));
        let mut nx = x.clone();
        nx.intersect_with(g.neighbors(v));
        r.push(v);
        bron_kerbosch(g, r, np, nx, out, cap)?;
        r.pop();
        p.set(v, false);
        x.insert(v);
    }
    Ok(())
}

/// Maximum-weight clique with its exact weight. Weights must be
/// nonnegative. For `n > 0` the result is never empty; ties go to the
/// lexicographically smallest sorted vertex list.
pub fn max_weighted_clique<W: CliqueWeight>(g: &Graph, w: &[W]) -> Result<(Clique, W)> {
    let n = g.n();
    if w.len() != n {
        return Err(Error::InvalidArgument(format!("{} weights for {} vertices", w.len(), n)));
    }
    if let Some(v) = w.iter().position(|x| *x < W::zero()) {
        return Err(Error::InvalidArgument(format!("negative weight at vertex {v}")));
    }
    if n == 0 {
        return Ok((Clique { vertices: vec![] }, W::zero()));
    }
    let mut s = Search {
        g,
        w,
        c: vec![W::zero(); n + 1],
        best: None,
        best_weight: W::zero(),
        round_recorded: false,
        stack: Vec::new(),
    };
    for i in (0..n).rev() {
        s.round_recorded = false;
        let mut cand = g.neighbors(i).clone();
        cand.set_range(..i + 1, false);
        s.stack.clear();
        s.stack.push(i);
        s.expand(w[i].clone(), &cand);
        s.c[i] = s.best_weight.clone();
    }
    let best = s.best.unwrap();
    Ok((Clique { vertices: best }, s.best_weight))
}

struct Search<'a, W> {
    g: &'a Graph,
    w: &'a [W],
    /// `c[j]`: maximum clique weight inside vertices `j..n`.
    c: Vec<W>,
    best: Option<Vec<usize>>,
    best_weight: W,
    round_recorded: bool,
    stack: Vec<usize>,
}

impl<W: CliqueWeight> Search<'_, W> {
    fn hopeless(&self, bound: &W) -> bool {
        if self.best.is_none() {
            return false;
        }
        if self.round_recorded {
            *bound <= self.best_weight
        } else {
            *bound < self.best_weight
        }
    }

    /// Greedy colouring of `cand`: a clique meets each colour class at most
    /// once, so the sum of class maxima bounds its weight.
    fn coloring_bound(&self, cand: &FixedBitSet) -> W {
        let mut classes: Vec<(FixedBitSet, W)> = Vec::new();
        for v in cand.ones() {
            let wv = &self.w[v];
            match classes.iter_mut().find(|(members, _)| members.is_disjoint(self.g.neighbors(v))) {
                Some((members, top)) => {
                    members.insert(v);
                    if *wv > *top {
                        *top = wv.clone();
                    }
                }
                None => {
                    let mut m = FixedBitSet::with_capacity(self.g.n());
                    m.insert(v);
                    classes.push((m, wv.clone()));
                }
            }
        }
        classes.into_iter().fold(W::zero(), |acc, (_, top)| acc + top)
    }

    fn expand(&mut self, weight: W, cand: &FixedBitSet) {
        let improves = match &self.best {
            None => true,
            Some(_) if self.round_recorded => weight > self.best_weight,
            Some(_) => weight >= self.best_weight,
        };
        if improves {
            self.best = Some(self.stack.clone());
            self.best_weight = weight.clone();
            self.round_recorded = true;
        }
        if cand.is_clear() || self.hopeless(&(weight.clone() + self.coloring_bound(cand))) {
            return;
        }
        let order: Vec<usize> = cand.ones().collect();
        // suffix[k]: total weight of order[k..].
        let mut suffix = vec![W::zero(); order.len() + 1];
        for k in (0..order.len()).rev() {
            suffix[k] = suffix[k + 1].clone() + self.w[order[k]].clone();
        }
        for (k, &v) in order.iter().enumerate() {
            // All later children live inside v..n, so once a bound fails, stop.
            if self.hopeless(&(weight.clone() + self.c[v].clone()))
                || self.hopeless(&(weight.clone() + suffix[k].clone()))
            {
                break;
            }
            let mut next = cand.clone();
            next.intersect_with(self.g.neighbors(v));
            next.set_range(..v + 1, false);
            self.stack.push(v);
            self.expand(weight.clone() + self.w[v].clone(), &next);
            self.stack.pop();
        }
    }
}

/// Maximum-weight independent set, i.e. a maximum-weight clique of the complement.
pub fn max_weight_independent_set<W: CliqueWeight>(g: &Graph, w: &[W]) -> Result<(Vec<usize>, W)> {
    let (c, wt) = max_weighted_clique(&g.complement(), w)?;
    Ok((c.vertices, wt))
}
