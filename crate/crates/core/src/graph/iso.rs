//! Isomorphism search by joint colour refinement and individualization.
//!
//! Both graphs are refined together so that colour ids are comparable; a
//! branch dies as soon as the colour histograms of the two sides differ.
//! Every leaf is checked edge by edge before it is returned.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsomorphismWitness {
    /// `mapping[v]` is the image in the second graph of vertex `v` of the first.
    pub mapping: Vec<usize>,
}

impl IsomorphismWitness {
    /// Checks bijectivity and that adjacency and non-adjacency are preserved.
    pub fn verify(&self, g: &Graph, h: &Graph) -> bool {
        let n = g.n();
        if h.n() != n || self.mapping.len() != n {
            return false;
        }
        let mut hit = vec![false; n];
        for &m in &self.mapping {
            if m >= n || std::mem::replace(&mut hit[m], true) {
                return false;
            }
        }
        (0..n).all(|u| {
            (u + 1..n).all(|v| g.has_edge(u, v) == h.has_edge(self.mapping[u], self.mapping[v]))
        })
    }
}

pub fn find_isomorphism(g: &Graph, h: &Graph) -> Option<IsomorphismWitness> {
    let n = g.n();
    if h.n() != n || g.edge_count() != h.edge_count() {
        return None;
    }
    if n == 0 {
        return Some(IsomorphismWitness { mapping: vec![] });
    }
    let (cg, ch) = refine(g, h, vec![0; n], vec![0; n])?;
    let mapping = search(g, h, cg, ch)?;
    let w = IsomorphismWitness { mapping };
    debug_assert!(w.verify(g, h));
    Some(w)
}

pub fn is_self_complementary(g: &Graph) -> bool {
    find_isomorphism(g, &g.complement()).is_some()
}

fn search(g: &Graph, h: &Graph, cg: Vec<u32>, ch: Vec<u32>) -> Option<Vec<usize>> {
    let n = g.n();
    // Smallest non-singleton colour class, ties to the smaller colour id.
    let mut sizes: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &cg {
        *sizes.entry(c).or_default() += 1;
    }
    let target = sizes
        .iter()
        .filter(|(_, &s)| s > 1)
        .min_by_key(|(&c, &s)| (s, c))
        .map(|(&c, _)| c);

    let Some(color) = target else {
        // Discrete colouring: the map is forced.
        let mut inv = vec![usize::MAX; n];
        for (v, &c) in ch.iter().enumerate() {
            inv[c as usize] = v;
        }
        let mapping: Vec<usize> = cg.iter().map(|&c| inv[c as usize]).collect();
        let w = IsomorphismWitness { mapping };
        return w.verify(g, h).then_some(w.mapping);
    };

    let u = cg.iter().position(|&c| c == color).unwrap();
    let fresh = n as u32;
    for v in (0..n).filter(|&v| ch[v] == color) {
        let mut ng = cg.clone();
        let mut nh = ch.clone();
        ng[u] = fresh;
        nh[v] = fresh;
        if let Some((rg, rh)) = refine(g, h, ng, nh) {
            if let Some(m) = search(g, h, rg, rh) {
                return Some(m);
            }
        }
    }
    None
}

/// Joint 1-dimensional Weisfeiler-Leman refinement. Colours are renumbered
/// canonically (by signature order) to `0..k`, so values stay below `n`.
fn refine(g: &Graph, h: &Graph, mut cg: Vec<u32>, mut ch: Vec<u32>) -> Option<(Vec<u32>, Vec<u32>)> {
    let mut classes = usize::MAX;
    loop {
        let sg = signatures(g, &cg);
        let sh = signatures(h, &ch);
        let mut ids: BTreeMap<&(u32, Vec<(u32, u32)>), u32> = BTreeMap::new();
        for s in sg.iter().chain(sh.iter()) {
            ids.entry(s).or_insert(0);
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i as u32;
        }
        let ng: Vec<u32> = sg.iter().map(|s| ids[s]).collect();
        let nh: Vec<u32> = sh.iter().map(|s| ids[s]).collect();
        let mut hist_g = ng.clone();
        let mut hist_h = nh.clone();
        hist_g.sort_unstable();
        hist_h.sort_unstable();
        if hist_g != hist_h {
            return None;
        }
        let k = ids.len();
        cg = ng;
        ch = nh;
        if k == classes {
            return Some((cg, ch));
        }
        classes = k;
    }
}

fn signatures(g: &Graph, colors: &[u32]) -> Vec<(u32, Vec<(u32, u32)>)> {
    (0..g.n())
        .map(|v| {
            let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
            for w in g.neighbors(v).ones() {
                *counts.entry(colors[w]).or_default() += 1;
            }
            (colors[v], counts.into_iter().collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, cycle_graph, generalized_composition, path_graph};

    #[test]
    fn pentagon_is_self_complementary() {
        let c5 = cycle_graph(5).unwrap();
        let w = find_isomorphism(&c5, &c5.complement()).unwrap();
        assert!(w.verify(&c5, &c5.complement()));
        assert!(is_self_complementary(&c5));
        assert!(!is_self_complementary(&cycle_graph(7).unwrap()));
        assert!(is_self_complementary(&path_graph(4)));
    }

    #[test]
    fn edge_count_mismatch() {
        assert!(find_isomorphism(&cycle_graph(4).unwrap(), &complete_graph(4)).is_none());
        assert!(find_isomorphism(&cycle_graph(4).unwrap(), &cycle_graph(5).unwrap()).is_none());
    }

    #[test]
    fn h_of_c7() {
        let c7 = cycle_graph(7).unwrap();
        let c7b = c7.complement();
        let h = generalized_composition(&path_graph(4), &[c7.clone(), c7b.clone(), c7b, c7]).unwrap();
        let hb = h.complement();
        let w = find_isomorphism(&h, &hb).unwrap();
        assert!(w.verify(&h, &hb));
    }

    #[test]
    fn regular_non_isomorphic() {
        // C6 and two disjoint triangles are both 2-regular on 6 vertices.
        let c6 = cycle_graph(6).unwrap();
        let two_k3 = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert!(find_isomorphism(&c6, &two_k3).is_none());
    }

    #[test]
    fn brute_force_agreement_small() {
        // All graphs on 4 vertices against a relabelled copy and against P4.
        let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
        let perm = [2usize, 0, 3, 1];
        for mask in 0u32..64 {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
            let g = Graph::from_edges(4, edges.iter().copied()).unwrap();
            let h = Graph::from_edges(4, edges.iter().map(|&(u, v)| (perm[u], perm[v]))).unwrap();
            assert!(find_isomorphism(&g, &h).unwrap().verify(&g, &h));
            let p4 = path_graph(4);
            let brute = permutations(4).into_iter().any(|p| {
                (0..4).all(|u| (u + 1..4).all(|v| g.has_edge(u, v) == p4.has_edge(p[u], p[v])))
            });
            assert_eq!(find_isomorphism(&g, &p4).is_some(), brute);
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = vec![];
        for p in permutations(n - 1) {
            for i in 0..n {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }
}
