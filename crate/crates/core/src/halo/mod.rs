//! Effective multi-photon emitters. A subgraph of pair sources that, under
//! post-selection, either delivers one photon into every vertex it connects
//! or none at all — with every partial delivery destructively interfering —
//! acts as a probabilistic multi-photon source. Such a subgraph is abstracted
//! as a hyperedge; stamping recolored copies of it back into a graph builds
//! generalized experiments without further search.

use std::collections::BTreeMap;

use thiserror::Error;

pub mod constructions;

use crate::graph::{enumerate_matchings_over, Edge, Graph, GraphError};


/// Relative amplitude below which an interference sum counts as cancelled.
pub const TEMPLATE_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum HaloError {
    #[error("not a valid multi-photon emitter: {0}")]
    NotAHalo(String),
    #[error("hyperedge arity {got} does not match template arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("missing or unusable template: {0}")]
    MissingTemplate(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An edge connecting more than two vertices: the abstract stand-in for an
/// emitter subgraph.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub vertices: Vec<usize>,
    pub modes: Vec<usize>,
    pub weight: f64,
}

/// A graph of ordinary two-edges plus hyperedges over its vertices.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    pub base: Graph,
    pub hyperedges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn new(base: Graph, hyperedges: Vec<Hyperedge>) -> Result<Self, HaloError> {
        for he in &hyperedges {
            if he.vertices.len() < 3 {
                return Err(HaloError::InvalidParam(format!(
                    "hyperedges connect at least 3 vertices, got {}",
                    he.vertices.len()
                )));
            }
            if he.modes.len() != he.vertices.len() {
                return Err(HaloError::InvalidParam(
                    "hyperedge needs one mode per vertex".into(),
                ));
            }
            let mut seen = he.vertices.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != he.vertices.len() {
                return Err(HaloError::InvalidParam(
                    "hyperedge vertices must be distinct".into(),
                ));
            }
            for (&v, &m) in he.vertices.iter().zip(&he.modes) {
                if v >= base.vertex_count() {
                    return Err(HaloError::InvalidParam(format!(
                        "hyperedge vertex {v} not in base graph"
                    )));
                }
                if m >= base.dimension(v) {
                    return Err(HaloError::InvalidParam(format!(
                        "hyperedge mode {m} exceeds dimension of vertex {v}"
                    )));
                }
            }
        }
        Ok(Hypergraph { base, hyperedges })
    }
}

/// The ancilla subgraph a hyperedge stands for, in local indexing: main
/// vertices first (0..main.len()), then ancillas.
#[derive(Debug, Clone, PartialEq)]
pub struct HaloTemplate {
    /// Original ids of the vertices the imitated hyperedge connects.
    pub main: Vec<usize>,
    /// Modes of the template's canonical (first) emission term.
    pub main_modes: Vec<usize>,
    pub ancilla_count: usize,
    /// Fixed ancilla output modes in every surviving term.
    pub herald_modes: Vec<usize>,
    pub subgraph: Vec<Edge>,
    /// Edge-count difference between a full emission event and the
    /// heralds-only event; the homogeneity degree of the emission amplitude.
    pub amplitude_degree: usize,
}

impl HaloTemplate {
    pub fn main_count(&self) -> usize {
        self.main.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.main.len() + self.ancilla_count
    }

    /// Local validation graph with dimensions wide enough for every mode the
    /// subgraph mentions.
    pub(crate) fn local_graph(&self) -> Result<Graph, GraphError> {
        let n = self.vertex_count();
        let mut dims = vec![1usize; n];
        for e in &self.subgraph {
            dims[e.u()] = dims[e.u()].max(e.mode_u() + 1);
            dims[e.v()] = dims[e.v()].max(e.mode_v() + 1);
        }
        for (i, &m) in self.main_modes.iter().enumerate() {
            dims[i] = dims[i].max(m + 1);
        }
        Graph::new(dims, self.subgraph.clone())
    }
}

/// One surviving emission of a template: the modes it injects into the main
/// vertices and the amplitude of that event.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub main_modes: Vec<usize>,
    pub amplitude: f64,
}

/// A cross term that failed to cancel.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTerm {
    /// Main vertices (local ids) the partial event covers.
    pub subset: Vec<usize>,
    /// Modes assigned to those vertices, then to the ancillas.
    pub modes: Vec<usize>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateReport {
    pub pass: bool,
    pub emissions: Vec<Emission>,
    /// Amplitude of the heralds-only event (zero when the subgraph cannot
    /// cover its ancillas alone).
    pub empty_amplitude: f64,
    pub cross_terms: Vec<CrossTerm>,
    pub failures: Vec<String>,
}

/// Computes the state of the template subgraph alone, split by which main
/// vertices the event covers. PASS means: at least one surviving full
/// emission, every surviving term heralding on `herald_modes`, and every
/// partial event cancelling below [`TEMPLATE_RESIDUAL`] of the emission
/// scale. The heralds-only contribution is reported but not required; it is
/// what lets copies of the template idle beside a base graph.
pub fn validate_template(tpl: &HaloTemplate) -> TemplateReport {
    let mut failures = Vec::new();
    if tpl.main_modes.len() != tpl.main.len() {
        failures.push("main_modes length differs from main".into());
    }
    if tpl.herald_modes.len() != tpl.ancilla_count {
        failures.push("herald_modes length differs from ancilla_count".into());
    }
    let local = match tpl.local_graph() {
        Ok(g) => g,
        Err(e) => {
            failures.push(format!("subgraph invalid: {e}"));
            return TemplateReport {
                pass: false,
                emissions: Vec::new(),
                empty_amplitude: 0.0,
                cross_terms: Vec::new(),
                failures,
            };
        }
    };

    let m = tpl.main.len();
    let n = tpl.vertex_count();
    // Sum of weight products per covered-subset and mode assignment.
    let mut full: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut empty: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut partial: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();

    for subset in 0u32..(1 << m) {
        let include: Vec<bool> = (0..n)
            .map(|v| v >= m || subset & (1 << v) != 0)
            .collect();
        for pm in enumerate_matchings_over(&local, &include) {
            let mut assignment = vec![0usize; n];
            let mut amp = 1.0;
            for e in pm.edges(&local) {
                amp *= e.weight;
                assignment[e.u()] = e.mode_u();
                assignment[e.v()] = e.mode_v();
            }
            let covered: Vec<usize> = (0..m).filter(|&v| subset & (1 << v) != 0).collect();
            let modes: Vec<usize> = covered
                .iter()
                .map(|&v| assignment[v])
                .chain((m..n).map(|v| assignment[v]))
                .collect();
            if covered.len() == m {
                *full.entry(modes).or_insert(0.0) += amp;
            } else if covered.is_empty() {
                *empty.entry(modes).or_insert(0.0) += amp;
            } else {
                *partial.entry((covered, modes)).or_insert(0.0) += amp;
            }
        }
    }

    let scale = full
        .values()
        .chain(empty.values())
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    if scale == 0.0 {
        failures.push("subgraph has no surviving emission or herald event".into());
        return TemplateReport {
            pass: false,
            emissions: Vec::new(),
            empty_amplitude: 0.0,
            cross_terms: Vec::new(),
            failures,
        };
    }
    let eps = TEMPLATE_RESIDUAL * scale;

    let mut emissions = Vec::new();
    for (modes, amp) in &full {
        if amp.abs() <= eps {
            continue;
        }
        let (main_part, anc_part) = modes.split_at(m);
        if anc_part != tpl.herald_modes {
            failures.push(format!(
                "emission {:?} heralds on {:?}, expected {:?}",
                main_part, anc_part, tpl.herald_modes
            ));
        }
        emissions.push(Emission {
            main_modes: main_part.to_vec(),
            amplitude: *amp,
        });
    }
    if emissions.is_empty() {
        failures.push("no surviving emission term".into());
    }
    if !emissions.is_empty() && emissions[0].main_modes != tpl.main_modes {
        failures.push(format!(
            "canonical emission {:?} differs from declared main_modes {:?}",
            emissions[0].main_modes, tpl.main_modes
        ));
    }

    let mut empty_amplitude = 0.0;
    for (modes, amp) in &empty {
        if amp.abs() <= eps {
            continue;
        }
        if modes.as_slice() == tpl.herald_modes {
            empty_amplitude = *amp;
        } else {
            failures.push(format!(
                "heralds-only event survives with modes {:?} instead of {:?}",
                modes, tpl.herald_modes
            ));
        }
    }

    let cross_terms: Vec<CrossTerm> = partial
        .into_iter()
        .filter(|(_, amp)| amp.abs() > eps)
        .map(|((subset, modes), amplitude)| CrossTerm {
            subset,
            modes,
            amplitude,
        })
        .collect();

    let pass = failures.is_empty() && cross_terms.is_empty();
    TemplateReport {
        pass,
        emissions,
        empty_amplitude,
        cross_terms,
        failures,
    }
}

/// Extracts the emitter that `g` adds on top of `base`: the new edges form
/// the template subgraph, the emission modes and heralds are inferred from
/// its surviving term. `main` lists the vertices the imitated hyperedge
/// connects (in template order); `ancillas` the vertices present only in `g`.
pub fn extract_halo(
    g: &Graph,
    main: &[usize],
    ancillas: &[usize],
    base: &Graph,
) -> Result<HaloTemplate, HaloError> {
    for e in base.edges() {
        if !g.has_edge_key(e.key()) {
            return Err(HaloError::InvalidParam(format!(
                "base edge ({},{}) modes ({},{}) is not part of the graph",
                e.u(),
                e.v(),
                e.mode_u(),
                e.mode_v()
            )));
        }
    }
    for &a in ancillas {
        if a < base.vertex_count() {
            return Err(HaloError::InvalidParam(format!(
                "ancilla {a} already exists in the base graph"
            )));
        }
    }
    let mut local = vec![usize::MAX; g.vertex_count()];
    for (i, &v) in main.iter().chain(ancillas).enumerate() {
        if v >= g.vertex_count() {
            return Err(HaloError::InvalidParam(format!("vertex {v} out of range")));
        }
        local[v] = i;
    }

    let mut subgraph = Vec::new();
    for e in g.edges() {
        if base.has_edge_key(e.key()) {
            continue;
        }
        let (lu, lv) = (local[e.u()], local[e.v()]);
        if lu == usize::MAX || lv == usize::MAX {
            return Err(HaloError::NotAHalo(format!(
                "new edge ({},{}) leaves the main/ancilla set",
                e.u(),
                e.v()
            )));
        }
        subgraph.push(Edge::new(lu, lv, e.mode_u(), e.mode_v(), e.weight));
    }
    if subgraph.is_empty() {
        return Err(HaloError::NotAHalo(
            "graph adds no edges over the base; there is no emitter to extract".into(),
        ));
    }

    // Probe validation with placeholder modes, then adopt the inferred ones.
    let mut tpl = HaloTemplate {
        main: main.to_vec(),
        main_modes: vec![0; main.len()],
        ancilla_count: ancillas.len(),
        herald_modes: vec![0; ancillas.len()],
        subgraph,
        amplitude_degree: main.len().div_ceil(2),
    };
    let probe = validate_template(&tpl);
    let Some(first) = probe.emissions.first() else {
        return Err(HaloError::NotAHalo(describe_failure(&probe)));
    };
    tpl.main_modes = first.main_modes.clone();
    // Herald pattern: read off the first emission's ancilla assignment.
    tpl.herald_modes = infer_herald(&tpl)?;

    let report = validate_template(&tpl);
    if !report.pass {
        return Err(HaloError::NotAHalo(describe_failure(&report)));
    }
    Ok(tpl)
}

fn infer_herald(tpl: &HaloTemplate) -> Result<Vec<usize>, HaloError> {
    let local = tpl.local_graph()?;
    let m = tpl.main.len();
    let include = vec![true; tpl.vertex_count()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut sums: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for pm in enumerate_matchings_over(&local, &include) {
        let mut assignment = vec![0usize; tpl.vertex_count()];
        let mut amp = 1.0;
        for e in pm.edges(&local) {
            amp *= e.weight;
            assignment[e.u()] = e.mode_u();
            assignment[e.v()] = e.mode_v();
        }
        *sums.entry(assignment).or_insert(0.0) += amp;
    }
    for (assignment, amp) in sums {
        if best.as_ref().is_none_or(|(a, _)| amp.abs() > *a) {
            best = Some((amp.abs(), assignment[m..].to_vec()));
        }
    }
    best.map(|(_, h)| h)
        .ok_or_else(|| HaloError::NotAHalo("subgraph has no full emission event".into()))
}

fn describe_failure(report: &TemplateReport) -> String {
    let mut parts: Vec<String> = report.failures.clone();
    for ct in report.cross_terms.iter().take(4) {
        parts.push(format!(
            "surviving cross term on mains {:?} with modes {:?} (amplitude {:.3e})",
            ct.subset, ct.modes, ct.amplitude
        ));
    }
    if report.cross_terms.len() > 4 {
        parts.push(format!("... {} cross terms total", report.cross_terms.len()));
    }
    parts.join("; ")
}

/// Replaces every hyperedge of `h` by a fresh recolored copy of the template
/// subgraph: main-endpoint modes are remapped from the template's emission
/// modes to the hyperedge's modes, ancilla-internal modes are copied
/// verbatim, and each copy's weights are scaled (on the edges at its first
/// main vertex, which every emission event uses exactly once) so the
/// emission amplitude equals the hyperedge weight. Ancillas are numbered
/// deterministically after the base vertices in hyperedge order.
pub fn expand(h: &Hypergraph, tpl: &HaloTemplate) -> Result<Graph, HaloError> {
    if h.hyperedges.is_empty() {
        return Ok(h.base.clone());
    }
    let report = validate_template(tpl);
    if !report.pass {
        return Err(HaloError::MissingTemplate(describe_failure(&report)));
    }
    if report.emissions.len() != 1 {
        return Err(HaloError::InvalidParam(format!(
            "template emits {} distinct terms; generic expansion needs exactly one",
            report.emissions.len()
        )));
    }
    let m = tpl.main.len();
    for e in &tpl.subgraph {
        for (v, mode) in [(e.u(), e.mode_u()), (e.v(), e.mode_v())] {
            if v < m && mode != tpl.main_modes[v] {
                return Err(HaloError::InvalidParam(format!(
                    "subgraph injects mode {mode} at main {v}, outside the emission modes; \
                     recoloring is ambiguous"
                )));
            }
        }
    }
    let emission_amp = report.emissions[0].amplitude;

    let local = tpl.local_graph()?;
    let anc_dims: Vec<usize> = (m..tpl.vertex_count())
        .map(|v| local.dimension(v))
        .collect();

    let mut dims = h.base.dimensions().to_vec();
    let mut roles = h.base.roles().to_vec();
    let mut edges = h.base.edges().to_vec();
    for (copy, he) in h.hyperedges.iter().enumerate() {
        if he.vertices.len() != m {
            return Err(HaloError::ArityMismatch {
                expected: m,
                got: he.vertices.len(),
            });
        }
        let anc_base = h.base.vertex_count() + copy * tpl.ancilla_count;
        let scale = he.weight / emission_amp;
        dims.extend_from_slice(&anc_dims);
        roles.extend(std::iter::repeat(crate::graph::VertexRole::Detector).take(tpl.ancilla_count));
        for e in &tpl.subgraph {
            let map = |v: usize, mode: usize| -> (usize, usize) {
                if v < m {
                    (he.vertices[v], he.modes[v])
                } else {
                    (anc_base + v - m, mode)
                }
            };
            let (gu, mu) = map(e.u(), e.mode_u());
            let (gv, mv) = map(e.v(), e.mode_v());
            let w = if e.u() == 0 || e.v() == 0 {
                e.weight * scale
            } else {
                e.weight
            };
            edges.push(Edge::new(gu, gv, mu, mv, w));
        }
    }
    Ok(Graph::with_roles(dims, roles, edges)?)
}
