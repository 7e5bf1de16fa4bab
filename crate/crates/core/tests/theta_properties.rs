mod common;

use exlab::assignments::{in_qstab, tensor_power, validate_unit_box, Verdict};
use exlab::graph::{cycle_graph, max_weight_independent_set, or_power, Graph};
use exlab::theta::{
    extract_witness, in_th, in_th_floats, lovasz_theta, solve_sdp, theta_problem, SdpOptions, ThStatus, DEFAULT_TOL,
};
use exlab::Error;
use proptest::prelude::*;

use common::{arb_graph, q};

/// Colours used by a greedy colouring of the complement: a clique cover of `g`.
fn greedy_clique_cover(g: &Graph) -> usize {
    let h = g.complement();
    let mut colour = vec![usize::MAX; g.n()];
    for v in 0..g.n() {
        let used: Vec<usize> = (0..v).filter(|&u| h.has_edge(u, v)).map(|u| colour[u]).collect();
        colour[v] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    colour.iter().map(|c| c + 1).max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sandwich(g in arb_graph(1, 10)) {
        let t = lovasz_theta(&g, &vec![1.0; g.n()]).unwrap().value;
        let (_, alpha) = max_weight_independent_set(&g, &vec![1u32; g.n()]).unwrap();
        prop_assert!(alpha as f64 <= t + 1e-6, "alpha {} theta {}", alpha, t);
        prop_assert!(t <= greedy_clique_cover(&g) as f64 + 1e-6);
    }

    #[test]
    fn theta_scales_linearly(g in arb_graph(1, 9), w in proptest::collection::vec(0.0f64..1.0, 9)) {
        let w = &w[..g.n()];
        let base = lovasz_theta(&g, w).unwrap().value;
        for lambda in [0.25, 3.0, 17.5] {
            let scaled: Vec<f64> = w.iter().map(|x| x * lambda).collect();
            let t = lovasz_theta(&g, &scaled).unwrap().value;
            prop_assert!((t - lambda * base).abs() <= 1e-6 * (1.0 + lambda * base), "{} vs {}", t, lambda * base);
        }
    }

    #[test]
    fn accepted_solves_meet_tolerance(g in arb_graph(1, 10), w in proptest::collection::vec(0.01f64..1.0, 10)) {
        let (problem, _) = theta_problem(&g, &w[..g.n()]).unwrap();
        let s = solve_sdp(&problem, &SdpOptions::default()).unwrap();
        prop_assert!(s.relative_gap <= DEFAULT_TOL);
        prop_assert!(s.primal_residual <= DEFAULT_TOL && s.dual_residual <= DEFAULT_TOL);
    }

    #[test]
    fn squared_pentagon_stays_consistent(ks in proptest::collection::vec(0i64..=45, 5)) {
        let c5 = cycle_graph(5).unwrap();
        let pa = validate_unit_box(&c5, ks.iter().map(|&k| q(k, 100)).collect()).unwrap();
        if in_th(&pa).unwrap().status == ThStatus::In {
            let t = tensor_power(&pa, 2).unwrap();
            prop_assert_eq!(in_qstab(&t).unwrap().verdict, Verdict::In);
            prop_assert_ne!(in_th(&t).unwrap().status, ThStatus::Out);
        }
    }

    #[test]
    fn witnesses_are_sound(g in arb_graph(2, 7), ks in proptest::collection::vec(0i64..=14, 7)) {
        let pa = validate_unit_box(&g, ks[..g.n()].iter().map(|&k| q(k, 20)).collect()).unwrap();
        match extract_witness(&pa) {
            Ok(w) => {
                let m = in_th_floats(&g.complement(), &w.q, &SdpOptions::default()).unwrap();
                prop_assert_eq!(m.status, ThStatus::In);
                let dot: f64 = pa.to_f64().iter().zip(&w.q).map(|(a, b)| a * b).sum();
                prop_assert!(dot > 1.0);
            }
            Err(Error::Precondition(_)) => prop_assert_ne!(in_th(&pa).unwrap().status, ThStatus::Out),
            Err(Error::Extraction(_)) => {}
            Err(e) => prop_assert!(false, "unexpected error {}", e),
        }
    }
}

#[test]
fn pentagon_square_theta() {
    let g = or_power(&cycle_graph(5).unwrap(), 2).unwrap();
    let t = lovasz_theta(&g, &[1.0; 25]).unwrap();
    assert!((t.value - 5.0).abs() <= 1e-4, "{}", t.value);
}
