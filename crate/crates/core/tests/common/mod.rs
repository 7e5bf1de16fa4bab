#![allow(dead_code)]

use exlab::graph::Graph;
use exlab::ScalarQ2;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(a: i64, b: i64) -> ScalarQ2 {
    ScalarQ2::from_ratio(a, b)
}

pub fn random_graph(r: &mut impl Rng, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Entries `k/den` with `k` uniform in `0..=max_num`.
pub fn random_rationals(r: &mut impl Rng, n: usize, max_num: i64, den: i64) -> Vec<ScalarQ2> {
    (0..n).map(|_| q(r.gen_range(0..=max_num), den)).collect()
}

/// `(1/3, 2/3, y, 2/3, 1/3)` on the pentagon.
pub fn q_c5(y: ScalarQ2) -> Vec<ScalarQ2> {
    vec![q(1, 3), q(2, 3), y, q(2, 3), q(1, 3)]
}

/// Max clique weight by checking every vertex subset.
pub fn brute_max_clique(g: &Graph, w: &[u64]) -> u64 {
    let n = g.n();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let vs: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if vs.iter().enumerate().all(|(a, &u)| vs[a + 1..].iter().all(|&v| g.has_edge(u, v))) {
            best = best.max(vs.iter().map(|&v| w[v]).sum());
        }
    }
    best
}

pub fn graph_from_bits(n: usize, bits: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut k = 0;
    for u in 0..n {
        for v in u + 1..n {
            if bits[k] {
                edges.push((u, v));
            }
            k += 1;
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn arb_graph(min_n: usize, max_n: usize) -> impl proptest::strategy::Strategy<Value = Graph> {
    use proptest::prelude::*;
    (min_n..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n.saturating_sub(1) / 2).prop_map(move |b| graph_from_bits(n, &b))
    })
}

/// A graph with an assignment of entries `k/den`, `k ≤ max_num`.
pub fn arb_assigned(
    min_n: usize,
    max_n: usize,
    max_num: i64,
    den: i64,
) -> impl proptest::strategy::Strategy<Value = (Graph, Vec<ScalarQ2>)> {
    use proptest::prelude::*;
    arb_graph(min_n, max_n).prop_flat_map(move |g| {
        let n = g.n();
        (Just(g), proptest::collection::vec(0..=max_num, n))
            .prop_map(move |(g, ks)| (g, ks.into_iter().map(|k| q(k, den)).collect()))
    })
}
