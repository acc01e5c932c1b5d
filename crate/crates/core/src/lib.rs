//! Design and verification of post-selected linear-optics experiments through
//! their graph representation.
//!
//! A vertex is a photon path ending in a detector, a colored weighted edge is
//! a probabilistic photon-pair source, and conditioning on one photon per
//! detector makes each perfect matching of the graph contribute one term to
//! the created state. On top of that formalism this crate provides:
//!
//! - construction of target states (GHZ families, AME(4,3), arbitrary kets),
//! - discovery of experiment graphs by seeded fidelity optimization with
//!   topological pruning,
//! - extraction of effective multi-photon-emitter subgraphs as reusable
//!   templates, their hyperedge abstraction, and expansion back to plain
//!   graphs by recoloring,
//! - ready-made generalized constructions (high-dimensional GHZ states,
//!   entanglement swapping, CNOT gates) with independent verification.

pub mod graph;
pub mod halo;
pub mod io;
pub mod optimize;
pub mod state;
pub mod target;
pub mod verify;

pub use graph::{complete_graph, enumerate_perfect_matchings, Edge, Graph, PerfectMatching, VertexRole};

pub use state::{state_from_graph, Ket, StateVector, AMPLITUDE_EPSILON};
pub use target::{ame43, ghz, ghz_with_ancillas, parse_target, TargetSpec};
pub use optimize::{discover, fidelity, fidelity_gradient, optimize_weights, DiscoveryResult, OptimizerConfig};
pub use halo::{expand, extract_halo, validate_template, HaloTemplate, Hyperedge, Hypergraph};
pub use verify::{project_inputs, verify_gate, verify_state, GateSpec, VerificationReport};
