//! Experiment graphs: vertices are photon paths to detectors, colored weighted
//! edges are correlated pair sources, and perfect matchings are the events in
//! which every detector fires exactly once.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("edge ({u},{v}) is a self-loop")]
    SelfLoop { u: usize, v: usize },
    #[error("edge endpoint {v} out of range for {vertex_count} vertices")]
    VertexOutOfRange { v: usize, vertex_count: usize },
    #[error("mode {mode} at vertex {v} exceeds dimension {dim}")]
    ModeOutOfRange { v: usize, mode: usize, dim: usize },
    #[error("duplicate edge key ({u},{v}) with modes ({mode_u},{mode_v})")]
    DuplicateEdge {
        u: usize,
        v: usize,
        mode_u: usize,
        mode_v: usize,
    },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge ({u},{v}) joins two input vertices")]
    InputInputEdge { u: usize, v: usize },
    #[error("dimension of vertex {v} must be positive")]
    ZeroDimension { v: usize },
}

/// Role of a vertex in the experiment.
///
/// Detectors are photon paths ending in a detector; inputs are incoming
/// photons of a gate. Edges between two inputs are not permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VertexRole {
    Detector,
    Input,
}

impl fmt::Display for VertexRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexRole::Detector => write!(f, "detector"),
            VertexRole::Input => write!(f, "input"),
        }
    }
}

/// A colored, weighted edge: a probabilistic pair source emitting one photon
/// into mode `mode_u` of path `u` and one into mode `mode_v` of path `v`.
///
/// Stored with `u < v`; the constructor swaps endpoints (and their modes) if
/// necessary, so `(u, v, mode_u, mode_v)` is a canonical key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    u: usize,
    v: usize,
    mode_u: usize,
    mode_v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(u: usize, v: usize, mode_u: usize, mode_v: usize, weight: f64) -> Self {
        if u <= v {
            Edge {
                u,
                v,
                mode_u,
                mode_v,
                weight,
            }
        } else {
            Edge {
                u: v,
                v: u,
                mode_u: mode_v,
                mode_v: mode_u,
                weight,
            }
        }
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn mode_u(&self) -> usize {
        self.mode_u
    }

    pub fn mode_v(&self) -> usize {
        self.mode_v
    }

    /// Canonical identity of the edge within a graph (weight excluded).
    pub fn key(&self) -> (usize, usize, usize, usize) {
        (self.u, self.v, self.mode_u, self.mode_v)
    }

    /// Mode this edge assigns to `vertex`, which must be an endpoint.
    pub fn mode_at(&self, vertex: usize) -> usize {
        debug_assert!(vertex == self.u || vertex == self.v);
        if vertex == self.u {
            self.mode_u
        } else {
            self.mode_v
        }
    }

    pub fn other(&self, vertex: usize) -> usize {
        debug_assert!(vertex == self.u || vertex == self.v);
        if vertex == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, vertex: usize) -> bool {
        self.u == vertex || self.v == vertex
    }

    pub fn with_weight(&self, weight: f64) -> Self {
        Edge { weight, ..*self }
    }
}

/// An experiment graph: per-vertex mode counts, per-vertex roles and a
/// canonically ordered list of colored weighted edges.
///
/// Immutable after construction; all operations on it are pure functions.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    dimensions: Vec<usize>,
    roles: Vec<VertexRole>,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a graph with all vertices in the detector role.
    pub fn new(dimensions: Vec<usize>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let roles = vec![VertexRole::Detector; dimensions.len()];
        Self::with_roles(dimensions, roles, edges)
    }

    pub fn with_roles(
        dimensions: Vec<usize>,
        roles: Vec<VertexRole>,
        mut edges: Vec<Edge>,
    ) -> Result<Self, GraphError> {
        let vertex_count = dimensions.len();
        if roles.len() != vertex_count {
            return Err(GraphError::LengthMismatch {
                expected: vertex_count,
                got: roles.len(),
            });
        }
        for (v, &d) in dimensions.iter().enumerate() {
            if d == 0 {
                return Err(GraphError::ZeroDimension { v });
            }
        }
        for e in &edges {
            if e.u == e.v {
                return Err(GraphError::SelfLoop { u: e.u, v: e.v });
            }
            if e.v >= vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    v: e.v,
                    vertex_count,
                });
            }
            if e.mode_u >= dimensions[e.u] {
                return Err(GraphError::ModeOutOfRange {
                    v: e.u,
                    mode: e.mode_u,
                    dim: dimensions[e.u],
                });
            }
            if e.mode_v >= dimensions[e.v] {
                return Err(GraphError::ModeOutOfRange {
                    v: e.v,
                    mode: e.mode_v,
                    dim: dimensions[e.v],
                });
            }
            if roles[e.u] == VertexRole::Input && roles[e.v] == VertexRole::Input {
                return Err(GraphError::InputInputEdge { u: e.u, v: e.v });
            }
        }
        // Canonical edge order makes every downstream computation independent
        // of the order edges were supplied in.
        edges.sort_by(|a, b| a.key().cmp(&b.key()).then(a.weight.total_cmp(&b.weight)));
        for w in edges.windows(2) {
            if w[0].key() == w[1].key() {
                let (u, v, mode_u, mode_v) = w[0].key();
                return Err(GraphError::DuplicateEdge {
                    u,
                    v,
                    mode_u,
                    mode_v,
                });
            }
        }
        Ok(Graph {
            vertex_count,
            dimensions,
            roles,
            edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn dimensions(&self) -> &[usize] {
        &self.dimensions
    }

    pub fn dimension(&self, v: usize) -> usize {
        self.dimensions[v]
    }

    pub fn roles(&self) -> &[VertexRole] {
        &self.roles
    }

    pub fn role(&self, v: usize) -> VertexRole {
        self.roles[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn detector_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count).filter(|&v| self.roles[v] == VertexRole::Detector)
    }

    pub fn input_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vertex_count).filter(|&v| self.roles[v] == VertexRole::Input)
    }

    pub fn has_edge_key(&self, key: (usize, usize, usize, usize)) -> bool {
        self.edges.binary_search_by(|e| e.key().cmp(&key)).is_ok()
    }

    /// New graph keeping only the edges selected by `keep`.
    pub fn filter_edges(&self, mut keep: impl FnMut(&Edge) -> bool) -> Graph {
        Graph {
            vertex_count: self.vertex_count,
            dimensions: self.dimensions.clone(),
            roles: self.roles.clone(),
            edges: self.edges.iter().filter(|e| keep(e)).cloned().collect(),
        }
    }

    /// New graph with the same topology and the given per-edge weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Graph, GraphError> {
        if weights.len() != self.edges.len() {
            return Err(GraphError::LengthMismatch {
                expected: self.edges.len(),
                got: weights.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| e.with_weight(w))
            .collect();
        Ok(Graph {
            vertex_count: self.vertex_count,
            dimensions: self.dimensions.clone(),
            roles: self.roles.clone(),
            edges,
        })
    }

    /// Restriction to `vertices`, relabelled 0..k in the order given.
    /// Keeps exactly the edges with both endpoints selected.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph, GraphError> {
        let mut local = vec![usize::MAX; self.vertex_count];
        for (i, &v) in vertices.iter().enumerate() {
            if v >= self.vertex_count {
                return Err(GraphError::VertexOutOfRange {
                    v,
                    vertex_count: self.vertex_count,
                });
            }
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
            .map(|e| Edge::new(local[e.u], local[e.v], e.mode_u, e.mode_v, e.weight))
            .collect();
        Graph::with_roles(
            vertices.iter().map(|&v| self.dimensions[v]).collect(),
            vertices.iter().map(|&v| self.roles[v]).collect(),
            edges,
        )
    }

    /// Applies a per-vertex mode permutation: `perms[v][old]` is the new mode
    /// of mode `old` at vertex `v`. Relabeling is a pure change of basis
    /// labels; states transform by the same relabeling.
    pub fn relabel_modes(&self, perms: &[Vec<usize>]) -> Result<Graph, GraphError> {
        if perms.len() != self.vertex_count {
            return Err(GraphError::LengthMismatch {
                expected: self.vertex_count,
                got: perms.len(),
            });
        }
        for (v, p) in perms.iter().enumerate() {
            let dim = self.dimensions[v];
            let mut seen = vec![false; dim];
            if p.len() != dim {
                return Err(GraphError::LengthMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            for &m in p {
                if m >= dim || seen[m] {
                    return Err(GraphError::ModeOutOfRange { v, mode: m, dim });
                }
                seen[m] = true;
            }
        }
        let edges = self
            .edges
            .iter()
            .map(|e| {
                Edge::new(
                    e.u,
                    e.v,
                    perms[e.u][e.mode_u],
                    perms[e.v][e.mode_v],
                    e.weight,
                )
            })
            .collect();
        Graph::with_roles(self.dimensions.clone(), self.roles.clone(), edges)
    }

    /// Structural equality: same shape and same canonical edge list with
    /// weights equal within `tol`.
    pub fn approx_eq(&self, other: &Graph, tol: f64) -> bool {
        self.vertex_count == other.vertex_count
            && self.dimensions == other.dimensions
            && self.roles == other.roles
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.key() == b.key() && (a.weight - b.weight).abs() <= tol)
    }
}

/// Complete colored graph: every vertex pair carries every mode combination,
/// unit weights. The usual starting topology for discovery.
pub fn complete_graph(vertex_count: usize, dimensions: &[usize]) -> Result<Graph, GraphError> {
    if dimensions.len() != vertex_count {
        return Err(GraphError::LengthMismatch {
            expected: vertex_count,
            got: dimensions.len(),
        });
    }
    let mut edges = Vec::new();
    for u in 0..vertex_count {
        for v in (u + 1)..vertex_count {
            for mu in 0..dimensions[u] {
                for mv in 0..dimensions[v] {
                    edges.push(Edge::new(u, v, mu, mv, 1.0));
                }
            }
        }
    }
    Graph::new(dimensions.to_vec(), edges)
}

/// A set of edges covering every vertex of the parent graph exactly once,
/// stored as indices into the graph's canonical edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerfectMatching {
    edge_indices: Vec<usize>,
}

impl PerfectMatching {
    pub fn edge_indices(&self) -> &[usize] {
        &self.edge_indices
    }

    pub fn edges<'a>(&'a self, g: &'a Graph) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edge_indices.iter().map(move |&i| g.edge(i))
    }

    /// Product of member edge weights: the amplitude this event contributes.
    pub fn amplitude(&self, g: &Graph) -> f64 {
        self.edge_indices.iter().map(|&i| g.edge(i).weight).product()
    }

    /// True iff every vertex of `g` is an endpoint of exactly one member edge.
    pub fn covers_exactly_once(&self, g: &Graph) -> bool {
        let mut count = vec![0usize; g.vertex_count()];
        for e in self.edges(g) {
            count[e.u()] += 1;
            count[e.v()] += 1;
        }
        count.iter().all(|&c| c == 1)
    }
}

/// Enumerates every perfect matching of `g` exactly once, in canonical order
/// (lexicographic by sorted edge indices). Odd vertex counts and graphs with
/// isolated vertices yield an empty list.
pub fn enumerate_perfect_matchings(g: &Graph) -> Vec<PerfectMatching> {
    enumerate_matchings_over(g, &vec![true; g.vertex_count()])
}

/// Perfect matchings of the subgraph induced by the vertices with
/// `include[v] == true`; excluded vertices and their edges are ignored.
pub(crate) fn enumerate_matchings_over(g: &Graph, include: &[bool]) -> Vec<PerfectMatching> {
    let n = g.vertex_count();
    debug_assert_eq!(include.len(), n);
    if include.iter().filter(|&&b| b).count() % 2 == 1 {
        return Vec::new();
    }

    // Incident edge indices per vertex, ascending (edges are pre-sorted).
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        if include[e.u()] && include[e.v()] {
            incident[e.u()].push(i);
            incident[e.v()].push(i);
        }
    }

    let mut covered: Vec<bool> = include.iter().map(|&b| !b).collect();
    let mut chosen = Vec::new();
    let mut out = Vec::new();
    recurse(g, &incident, &mut covered, &mut chosen, &mut out);
    for pm in &mut out {
        pm.edge_indices.sort_unstable();
    }
    out.sort_by(|a, b| a.edge_indices.cmp(&b.edge_indices));
    out
}

fn recurse(
    g: &Graph,
    incident: &[Vec<usize>],
    covered: &mut [bool],
    chosen: &mut Vec<usize>,
    out: &mut Vec<PerfectMatching>,
) {
    let Some(next) = covered.iter().position(|&c| !c) else {
        out.push(PerfectMatching {
            edge_indices: chosen.clone(),
        });
        return;
    };
    for &i in &incident[next] {
        let e = g.edge(i);
        let other = e.other(next);
        if covered[other] {
            continue;
        }
        covered[next] = true;
        covered[other] = true;
        chosen.push(i);
        recurse(g, incident, covered, chosen, out);
        chosen.pop();
        covered[next] = false;
        covered[other] = false;
    }
}
