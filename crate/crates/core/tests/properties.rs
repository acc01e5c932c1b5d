//! Property tests for the matching state formalism: agreement with a
//! brute-force oracle, multilinearity, scale behavior and edge-order
//! invariance on randomized small graphs.

use num_complex::Complex64;
use proptest::prelude::*;

use halo_core::graph::{enumerate_perfect_matchings, Edge, Graph};
use halo_core::state::{state_from_graph, Ket, StateVector};

/// Independent oracle: test every edge subset of size V/2 for the
/// perfect-matching property and accumulate amplitudes directly.
fn oracle_state(g: &Graph) -> StateVector {
    let n = g.vertex_count();
    let mut terms: std::collections::BTreeMap<Ket, f64> = std::collections::BTreeMap::new();
    if n % 2 == 0 {
        let k = n / 2;
        let edge_count = g.edges().len();
        let mut indices: Vec<usize> = (0..k).collect();
        if edge_count >= k {
            loop {
                let mut cover = vec![0usize; n];
                let mut amp = 1.0;
                let mut modes = vec![0u8; n];
                for &i in &indices {
                    let e = g.edge(i);
                    cover[e.u()] += 1;
                    cover[e.v()] += 1;
                    amp *= e.weight;
                    modes[e.u()] = e.mode_u() as u8;
                    modes[e.v()] = e.mode_v() as u8;
                }
                if cover.iter().all(|&c| c == 1) {
                    *terms.entry(Ket(modes)).or_insert(0.0) += amp;
                }
                // Next k-combination of edge indices.
                let mut i = k;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if indices[i] != i + edge_count - k {
                        indices[i] += 1;
                        for j in (i + 1)..k {
                            indices[j] = indices[j - 1] + 1;
                        }
                        break;
                    }
                    if i == 0 {
                        indices.clear();
                        break;
                    }
                }
                if indices.is_empty() {
                    break;
                }
            }
        }
    }
    let filtered = terms
        .into_iter()
        .filter(|(_, a)| a.abs() > halo_core::AMPLITUDE_EPSILON)
        .map(|(k, a)| (k, Complex64::new(a, 0.0)))
        .collect();
    StateVector::new(filtered, false)
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    // 2..=6 vertices, dimensions 1..=3, up to 12 distinct colored edges.
    (2usize..=6)
        .prop_flat_map(|n| {
            let dims = proptest::collection::vec(1usize..=3, n);
            (Just(n), dims)
        })
        .prop_flat_map(|(n, dims)| {
            let edges = proptest::collection::vec(
                (
                    0usize..n,
                    0usize..n,
                    0usize..3,
                    0usize..3,
                    -2.0f64..2.0,
                ),
                0..=12,
            );
            (Just(dims), edges)
        })
        .prop_map(|(dims, raw)| {
            let mut edges: Vec<Edge> = Vec::new();
            let mut keys = std::collections::BTreeSet::new();
            for (u, v, mu, mv, w) in raw {
                if u == v {
                    continue;
                }
                let e = Edge::new(u, v, mu % dims[u], mv % dims[v], w);
                if keys.insert(e.key()) {
                    edges.push(e);
                }
            }
            Graph::new(dims, edges).expect("constructed within bounds")
        })
}

fn states_close(a: &StateVector, b: &StateVector) -> bool {
    let kets: std::collections::BTreeSet<_> =
        a.terms().map(|(k, _)| k.clone()).chain(b.terms().map(|(k, _)| k.clone())).collect();
    kets.iter()
        .all(|k| (a.amplitude(k) - b.amplitude(k)).norm() < 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn state_matches_subset_enumeration_oracle(g in arb_graph()) {
        let fast = state_from_graph(&g).unwrap();
        let slow = oracle_state(&g);
        prop_assert!(states_close(&fast, &slow));
    }

    #[test]
    fn every_matching_covers_every_vertex_once(g in arb_graph()) {
        for pm in enumerate_perfect_matchings(&g) {
            prop_assert!(pm.covers_exactly_once(&g));
        }
    }

    #[test]
    fn matchings_are_unique_and_canonically_ordered(g in arb_graph()) {
        let pms = enumerate_perfect_matchings(&g);
        for w in pms.windows(2) {
            prop_assert!(w[0].edge_indices() < w[1].edge_indices());
        }
    }

    #[test]
    fn global_scale_acts_as_lambda_to_half_vertex_count(g in arb_graph(), lambda in 0.25f64..4.0) {
        let s0 = state_from_graph(&g).unwrap();
        let scaled: Vec<f64> = g.edges().iter().map(|e| e.weight * lambda).collect();
        let s1 = state_from_graph(&g.with_weights(&scaled).unwrap()).unwrap();
        let factor = lambda.powi((g.vertex_count() / 2) as i32);
        prop_assert!(states_close(&s1, &s0.scaled(Complex64::new(factor, 0.0))));
    }

    #[test]
    fn edge_order_does_not_change_the_state(g in arb_graph(), seed in any::<u64>()) {
        // Any permutation of the edge list yields the identical state map.
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut edges = g.edges().to_vec();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        edges.shuffle(&mut rng);
        let shuffled = Graph::new(g.dimensions().to_vec(), edges).unwrap();
        let a = state_from_graph(&g).unwrap();
        let b = state_from_graph(&shuffled).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn multilinearity_in_single_edge_weight(g in arb_graph(), lambda in -3.0f64..3.0) {
        prop_assume!(!g.edges().is_empty());
        let target_edge = 0;
        let s0 = state_from_graph(&g).unwrap();
        let mut weights: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
        weights[target_edge] *= lambda;
        let s1 = state_from_graph(&g.with_weights(&weights).unwrap()).unwrap();

        // Sum amplitudes per ket separately over matchings with and without
        // the edge; scaling acts only on the "with" part.
        let pms = enumerate_perfect_matchings(&g);
        let mut with: std::collections::BTreeMap<Ket, f64> = Default::default();
        let mut without: std::collections::BTreeMap<Ket, f64> = Default::default();
        for pm in &pms {
            let mut modes = vec![0u8; g.vertex_count()];
            let mut amp = 1.0;
            for e in pm.edges(&g) {
                amp *= e.weight;
                modes[e.u()] = e.mode_u() as u8;
                modes[e.v()] = e.mode_v() as u8;
            }
            let bucket = if pm.edge_indices().contains(&target_edge) {
                &mut with
            } else {
                &mut without
            };
            *bucket.entry(Ket(modes)).or_insert(0.0) += amp;
        }
        let kets: std::collections::BTreeSet<_> = with.keys().chain(without.keys()).cloned().collect();
        for ket in kets {
            let expected = lambda * with.get(&ket).copied().unwrap_or(0.0)
                + without.get(&ket).copied().unwrap_or(0.0);
            let got = s1.amplitude(&ket).re;
            prop_assert!((got - expected).abs() < 1e-9, "ket {} expected {} got {}", ket, expected, got);
        }
        let _ = s0;
    }
}
