//! Shared fixtures for the kernel benchmarks.

use halo_core::graph::{complete_graph, Edge, Graph};
use halo_core::target::{ghz, ghz_with_ancillas, TargetSpec};

/// Complete discovery topology for the four-dimensional GHZ search.
pub fn ghz44_search_space() -> (Graph, TargetSpec) {
    let dims = [4, 4, 4, 4, 1, 1, 1, 1];
    (
        complete_graph(8, &dims).unwrap(),
        ghz_with_ancillas(4, 4, 4).unwrap(),
    )
}

pub fn ghz43_graph() -> (Graph, TargetSpec) {
    let g = Graph::new(
        vec![3; 4],
        vec![
            Edge::new(0, 1, 0, 0, 1.0),
            Edge::new(2, 3, 0, 0, 1.0),
            Edge::new(0, 2, 1, 1, 1.0),
            Edge::new(1, 3, 1, 1, 1.0),
            Edge::new(0, 3, 2, 2, 1.0),
            Edge::new(1, 2, 2, 2, 1.0),
        ],
    )
    .unwrap();
    (g, ghz(4, 3).unwrap())
}
