//! Finite simple graphs and the constructions used on exclusivity graphs:
//! complement, OR (co-normal) product, generalized composition and induced
//! subgraphs, plus isomorphism, perfection and clique searches.
//!
//! Vertices are always `0..n`. Adjacency is stored as one bitset row per
//! vertex, which keeps the dense product graphs (e.g. `C5^{*3}`, degree 98
//! out of 125) cheap to query.

mod clique;
pub mod io;
mod iso;
mod perfect;

pub use clique::{
    enumerate_maximal_cliques, enumerate_maximal_cliques_capped, max_weight_independent_set,
    max_weighted_clique, Clique, CliqueWeight, DEFAULT_CLIQUE_OUTPUT_CAP,
};
pub use iso::{find_isomorphism, is_self_complementary, IsomorphismWitness};
pub use perfect::{is_perfect, is_perfect_capped, Obstruction, ObstructionKind, PerfectVerdict,
    DEFAULT_PERFECT_CAP};

use fixedbitset::FixedBitSet;

use crate::error::{resource_limit, Error, Result};

/// Default cap on the vertex count of product graphs.
pub const DEFAULT_PRODUCT_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<FixedBitSet>,
    labels: Option<Vec<String>>,
}

impl Graph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![FixedBitSet::with_capacity(n); n],
            labels: None,
        }
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            g.connect(u, v);
        }
        Ok(g)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub(crate) fn connect(&mut self, u: usize, v: usize) {
        self.adj[u].insert(v);
        self.adj[v].insert(u);
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &FixedBitSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.adj[u].ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// True when the adjacency relations coincide (labels ignored).
    pub fn same_edges(&self, other: &Graph) -> bool {
        self.n == other.n && self.adj == other.adj
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for u in 0..self.n {
            let mut row = self.adj[u].clone();
            row.toggle_range(..);
            row.set(u, false);
            g.adj[u] = row;
        }
        g.labels = self.labels.clone();
        g
    }
}

pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs at least 3 vertices, got {n}")));
    }
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            g.connect(u, v);
        }
    }
    g
}

/// Path `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Graph {
    let mut g = Graph::empty(n);
    for i in 1..n {
        g.connect(i - 1, i);
    }
    g
}

pub fn complement(g: &Graph) -> Graph {
    g.complement()
}

/// OR product with the default vertex cap.
pub fn or_product(g: &Graph, h: &Graph) -> Result<Graph> {
    or_product_capped(g, h, DEFAULT_PRODUCT_CAP)
}

/// `(i, i')` is vertex `i * |V(h)| + i'`; `(i,i') ~ (j,j')` iff `i ~ j` in `g`
/// or `i' ~ j'` in `h`.
pub fn or_product_capped(g: &Graph, h: &Graph, cap: usize) -> Result<Graph> {
    let requested = g.n as u128 * h.n as u128;
    if requested > cap as u128 {
        return Err(resource_limit("OR product vertices", requested, cap));
    }
    let (gn, hn) = (g.n, h.n);
    let n = gn * hn;
    let mut out = Graph::empty(n);
    for i in 0..gn {
        for ip in 0..hn {
            let row = &mut out.adj[i * hn + ip];
            for j in 0..gn {
                if g.has_edge(i, j) {
                    row.insert_range(j * hn..(j + 1) * hn);
                } else {
                    for jp in h.adj[ip].ones() {
                        row.insert(j * hn + jp);
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn or_power(g: &Graph, k: usize) -> Result<Graph> {
    or_power_capped(g, k, DEFAULT_PRODUCT_CAP)
}

/// `k`-fold OR product; the leftmost factor is the most significant digit of
/// the mixed-radix vertex index.
pub fn or_power_capped(g: &Graph, k: usize, cap: usize) -> Result<Graph> {
    if k == 0 {
        return Err(Error::InvalidArgument("OR power needs k >= 1".into()));
    }
    let requested = (g.n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if requested > cap as u128 {
        return Err(resource_limit("OR power vertices", requested, cap));
    }
    let mut acc = g.clone().without_labels();
    for _ in 1..k {
        acc = or_product_capped(&acc, g, cap)?;
    }
    Ok(acc)
}

/// Mixed-radix digits of a vertex of `G^{*k}` with `base = |V(G)|`.
pub fn power_digits(mut v: usize, base: usize, k: usize) -> Vec<usize> {
    let mut d = vec![0; k];
    for slot in d.iter_mut().rev() {
        *slot = v % base;
        v /= base;
    }
    d
}

/// Inverse of [`power_digits`].
pub fn power_index(digits: &[usize], base: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * base + d)
}

/// `skeleton[parts]`: disjoint union of the parts, with every vertex of
/// `parts[i]` joined to every vertex of `parts[j]` when `i ~ j` in the
/// skeleton. Vertex labels record `"<block>:<local index>"`.
pub fn generalized_composition(skeleton: &Graph, parts: &[Graph]) -> Result<Graph> {
    if parts.len() != skeleton.n {
        return Err(Error::InvalidArgument(format!(
            "skeleton has {} vertices but {} parts were given",
            skeleton.n,
            parts.len()
        )));
    }
    let mut offsets = Vec::with_capacity(parts.len() + 1);
    offsets.push(0);
    for p in parts {
        offsets.push(offsets.last().unwrap() + p.n);
    }
    let n = *offsets.last().unwrap();
    let mut out = Graph::empty(n);
    let mut labels = Vec::with_capacity(n);
    for (b, part) in parts.iter().enumerate() {
        let base = offsets[b];
        for (u, v) in part.edges() {
            out.connect(base + u, base + v);
        }
        for local in 0..part.n {
            labels.push(format!("{b}:{local}"));
        }
    }
    for (a, b) in skeleton.edges() {
        for u in offsets[a]..offsets[a + 1] {
            out.adj[u].insert_range(offsets[b]..offsets[b + 1]);
            for v in offsets[b]..offsets[b + 1] {
                out.adj[v].insert(u);
            }
        }
    }
    out.labels = Some(labels);
    Ok(out)
}

/// Induced subgraph on `s` (in the given order, duplicates rejected).
/// Returns the subgraph and the map from new to original vertex indices.
pub fn induced_subgraph(g: &Graph, s: &[usize]) -> Result<(Graph, Vec<usize>)> {
    let mut seen = FixedBitSet::with_capacity(g.n);
    for &v in s {
        if v >= g.n {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} out of range for {} vertices",
                g.n
            )));
        }
        if seen.put(v) {
            return Err(Error::InvalidArgument(format!("vertex {v} listed twice")));
        }
    }
    let mut out = Graph::empty(s.len());
    for (a, &u) in s.iter().enumerate() {
        for (b, &v) in s.iter().enumerate().skip(a + 1) {
            if g.has_edge(u, v) {
                out.connect(a, b);
            }
        }
    }
    if let Some(l) = &g.labels {
        out.labels = Some(s.iter().map(|&v| l[v].clone()).collect());
    }
    Ok((out, s.to_vec()))
}
