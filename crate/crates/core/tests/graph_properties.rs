mod common;

use exlab::graph::{
    enumerate_maximal_cliques, find_isomorphism, generalized_composition, is_perfect, max_weighted_clique,
    or_product, Clique, Graph,
};
use proptest::prelude::*;

use common::{arb_graph, brute_max_clique};

fn relabel(g: &Graph, perm: &[usize]) -> Graph {
    Graph::from_edges(g.n(), g.edges().map(|(u, v)| (perm[u], perm[v]))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complement_is_an_involution(g in arb_graph(0, 12)) {
        prop_assert_eq!(g.complement().complement(), g);
    }

    #[test]
    fn or_product_matches_definition(g in arb_graph(1, 6), h in arb_graph(1, 6)) {
        let p = or_product(&g, &h).unwrap();
        prop_assert_eq!(p.n(), g.n() * h.n());
        for a in 0..p.n() {
            for b in a + 1..p.n() {
                // Row-major pairs: index = u·|H| + v.
                let (u1, v1) = (a / h.n(), a % h.n());
                let (u2, v2) = (b / h.n(), b % h.n());
                let want = g.has_edge(u1, u2) || h.has_edge(v1, v2);
                prop_assert_eq!(p.has_edge(a, b), want);
                let non_edge = !g.has_edge(u1, u2) && !h.has_edge(v1, v2);
                prop_assert_eq!(!p.has_edge(a, b), non_edge);
            }
        }
    }

    #[test]
    fn composition_over_a_single_vertex(g in arb_graph(0, 10)) {
        let c = generalized_composition(&Graph::empty(1), std::slice::from_ref(&g)).unwrap();
        prop_assert!(c.same_edges(&g));
        prop_assert_eq!(c.n(), g.n());
    }

    #[test]
    fn isomorphism_witnesses_verify(g in arb_graph(1, 12), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut perm: Vec<usize> = (0..g.n()).collect();
        perm.shuffle(&mut common::rng(seed));
        let h = relabel(&g, &perm);
        let w = find_isomorphism(&g, &h).expect("relabelled graphs are isomorphic");
        prop_assert!(w.verify(&g, &h));
        for (u, v) in g.edges() {
            prop_assert!(h.has_edge(w.mapping[u], w.mapping[v]));
        }
        if let Some(w) = find_isomorphism(&g, &g.complement()) {
            prop_assert!(w.verify(&g, &g.complement()));
        }
    }

    #[test]
    fn perfection_is_complement_invariant(g in arb_graph(0, 10)) {
        let a = is_perfect(&g).unwrap();
        let b = is_perfect(&g.complement()).unwrap();
        prop_assert_eq!(a.perfect, b.perfect);
        if let Some(o) = a.obstruction {
            let c = &o.cycle;
            prop_assert!(c.len() >= 5 && c.len() % 2 == 1);
        }
    }

    #[test]
    fn maximal_cliques_are_maximal_and_cover_edges(g in arb_graph(0, 12)) {
        let cs = enumerate_maximal_cliques(&g).unwrap();
        for c in &cs {
            prop_assert!(Clique::new(&g, c.vertices().to_vec()).is_ok());
            prop_assert!(c.is_maximal(&g));
        }
        for (u, v) in g.edges() {
            prop_assert!(cs.iter().any(|c| c.vertices().contains(&u) && c.vertices().contains(&v)));
        }
    }

    #[test]
    fn max_clique_matches_exhaustive_search(g in arb_graph(0, 12), seed in any::<u64>()) {
        use rand::Rng;
        let mut r = common::rng(seed);
        let w: Vec<u64> = (0..g.n()).map(|_| r.gen_range(0..=30)).collect();
        let (c, wt) = max_weighted_clique(&g, &w).unwrap();
        prop_assert_eq!(wt, brute_max_clique(&g, &w));
        prop_assert_eq!(c.vertices().iter().map(|&v| w[v]).sum::<u64>(), wt);
        prop_assert!(Clique::new(&g, c.vertices().to_vec()).is_ok());
    }
}
