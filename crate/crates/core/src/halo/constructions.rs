//! The generalized experiment families built from committed emitter
//! templates: high-dimensional GHZ states, the six-plus-2n GHZ family,
//! entanglement swapping and controlled-shift gates. Construction is pure
//! stamping of recolored template copies; no optimization runs here.

use crate::graph::{Edge, Graph};
use crate::target::{ghz, max_entangled_pair};
use crate::verify::{verify_gate, verify_state, GateSpec, VerificationReport, VerifyError};

use super::{expand, validate_template, HaloError, HaloTemplate, Hyperedge, Hypergraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// GHZ_4^d from the four-photon emitter, d >= 3.
    Ghz,
    /// GHZ_{6+2n}^3 from the six-particle seed solution.
    Ghz63,
    /// 2k-dimensional entanglement swapping.
    Swap,
    /// CNOT(2, 2k) gates.
    Cnot,
}

/// Committed data a family builds from: the emitter template plus, for
/// families that need one, a fixed seed graph.
#[derive(Debug, Clone)]
pub struct Assets {
    pub template: HaloTemplate,
    pub seed_graph: Option<Graph>,
}

impl Assets {
    /// Built-in assets produced by the discovery pipeline and committed with
    /// the crate.
    pub fn builtin(family: Family) -> Result<Assets, HaloError> {
        let parse_tpl = |json: &str| {
            crate::io::read_template(json)
                .map_err(|e| HaloError::MissingTemplate(format!("bundled template invalid: {e}")))
        };
        let parse_graph = |json: &str| {
            crate::io::read_graph(json)
                .map_err(|e| HaloError::MissingTemplate(format!("bundled graph invalid: {e}")))
        };
        let assets = match family {
            Family::Ghz => Assets {
                template: parse_tpl(include_str!("../../assets/ghz4_template.json"))?,
                seed_graph: None,
            },
            Family::Swap => Assets {
                template: parse_tpl(include_str!("../../assets/swap_template.json"))?,
                seed_graph: None,
            },
            Family::Ghz63 => Assets {
                template: parse_tpl(include_str!("../../assets/ghz63_template.json"))?,
                seed_graph: Some(parse_graph(include_str!("../../assets/ghz63_seed.json"))?),
            },
            Family::Cnot => Assets {
                template: parse_tpl(include_str!("../../assets/cnot_template.json"))?,
                seed_graph: Some(parse_graph(include_str!("../../assets/cnot_seed.json"))?),
            },
        };
        Ok(assets)
    }

    /// Assets with the template replaced by one loaded from JSON; the seed
    /// graph stays built-in.
    pub fn from_template_json(family: Family, template_json: &str) -> Result<Assets, HaloError> {
        let template = crate::io::read_template(template_json)
            .map_err(|e| HaloError::MissingTemplate(format!("template file invalid: {e}")))?;
        let mut assets = Assets::builtin(family)?;
        assets.template = template;
        Ok(assets)
    }
}

pub fn construct(family: Family, param: usize, assets: &Assets) -> Result<Graph, HaloError> {
    match family {
        Family::Ghz => construct_ghz(param, &assets.template),
        Family::Ghz63 => construct_ghz_family_63(param, assets),
        Family::Swap => construct_swapping(param, &assets.template),
        Family::Cnot => construct_cnot(param, assets),
    }
}

/// Independent check of a constructed graph against what the family promises.
pub fn verify_construction(
    family: Family,
    param: usize,
    graph: &Graph,
) -> Result<VerificationReport, VerifyError> {
    const TOL: f64 = 1e-9;
    match family {
        Family::Ghz => {
            let ancillas = graph.vertex_count() - 4;
            let target = ghz(4, param)
                .map_err(|e| VerifyError::ShapeMismatch(e.to_string()))?
                .with_heralds(ancillas);
            verify_state(graph, &target, TOL)
        }
        Family::Ghz63 => {
            let mains = 6 + 2 * param;
            let ancillas = graph.vertex_count() - mains;
            let target = ghz(mains, 3)
                .map_err(|e| VerifyError::ShapeMismatch(e.to_string()))?
                .with_heralds(ancillas);
            verify_state(graph, &target, TOL)
        }
        Family::Swap => {
            let ancillas = graph.vertex_count() - 2;
            let target = max_entangled_pair(2 * param, ancillas)
                .map_err(|e| VerifyError::ShapeMismatch(e.to_string()))?;
            verify_state(graph, &target, TOL)
        }
        Family::Cnot => {
            let spec = GateSpec::cnot(2, 2 * param, graph.vertex_count() - 4);
            verify_gate(graph, &spec, TOL)
        }
    }
}

/// The hand-built three-pairing graph creating GHZ_4^3, with room for `dim`
/// modes per particle.
pub fn ghz43_graph(dim: usize) -> Result<Graph, HaloError> {
    if dim < 3 {
        return Err(HaloError::InvalidParam(format!(
            "GHZ_4 base needs dimension >= 3, got {dim}"
        )));
    }
    Ok(Graph::new(
        vec![dim; 4],
        vec![
            Edge::new(0, 1, 0, 0, 1.0),
            Edge::new(2, 3, 0, 0, 1.0),
            Edge::new(0, 2, 1, 1, 1.0),
            Edge::new(1, 3, 1, 1, 1.0),
            Edge::new(0, 3, 2, 2, 1.0),
            Edge::new(1, 2, 2, 2, 1.0),
        ],
    )?)
}

/// GHZ_4^d: the three-pairing base plus d-3 recolored copies of the
/// four-photon emitter, one per extra dimension, 4(d-3) ancillas in total.
/// Each hyperedge weight is the template's heralds-only amplitude so all d
/// terms come out equal.
pub fn construct_ghz(d: usize, template: &HaloTemplate) -> Result<Graph, HaloError> {
    if d < 3 {
        return Err(HaloError::InvalidParam(format!(
            "the GHZ_4 family starts at dimension 3, got {d}"
        )));
    }
    let report = validate_template(template);
    if !report.pass || report.emissions.len() != 1 || template.main.len() != 4 {
        return Err(HaloError::MissingTemplate(
            "the GHZ family needs a validated four-photon single-term emitter".into(),
        ));
    }
    if report.empty_amplitude == 0.0 {
        return Err(HaloError::MissingTemplate(
            "the GHZ emitter must also cover its ancillas alone, or copies cannot idle".into(),
        ));
    }
    let base = ghz43_graph(d)?;
    let hyperedges = (0..d - 3)
        .map(|j| Hyperedge {
            vertices: vec![0, 1, 2, 3],
            modes: vec![3 + j; 4],
            weight: report.empty_amplitude,
        })
        .collect();
    expand(&Hypergraph::new(base, hyperedges)?, template)
}

/// 2k-dimensional entanglement swapping: k recolored copies of the
/// two-photon pair emitter between the two parties, two ancillas each, and
/// structurally no edge between the parties.
pub fn construct_swapping(k: usize, template: &HaloTemplate) -> Result<Graph, HaloError> {
    if k < 1 {
        return Err(HaloError::InvalidParam(
            "swapping needs half-dimension k >= 1".into(),
        ));
    }
    let report = validate_template(template);
    if !report.pass || template.main.len() != 2 {
        return Err(HaloError::MissingTemplate(
            "swapping needs a validated two-party emitter".into(),
        ));
    }
    let emissions = &report.emissions;
    if emissions.len() != 2
        || emissions[0].main_modes != vec![0, 0]
        || emissions[1].main_modes != vec![1, 1]
    {
        return Err(HaloError::MissingTemplate(
            "the swapping emitter must produce exactly the (0,0) and (1,1) pair terms".into(),
        ));
    }
    if (emissions[0].amplitude - emissions[1].amplitude).abs()
        > 1e-9 * emissions[0].amplitude.abs()
    {
        return Err(HaloError::MissingTemplate(
            "the two pair terms must have equal amplitude".into(),
        ));
    }
    if k > 1 && report.empty_amplitude == 0.0 {
        return Err(HaloError::MissingTemplate(
            "idle copies need the heralds-only event; the emitter lacks one".into(),
        ));
    }

    let local = template.local_graph()?;
    let anc_dims: Vec<usize> = (2..template.vertex_count())
        .map(|v| local.dimension(v))
        .collect();
    let mut dims = vec![2 * k, 2 * k];
    let mut edges = Vec::new();
    for copy in 0..k {
        let anc_base = 2 + copy * template.ancilla_count;
        dims.extend_from_slice(&anc_dims);
        for e in &template.subgraph {
            // Main-endpoint modes 0/1 recolor to the copy's mode pair
            // (2*copy, 2*copy + 1); ancilla modes are copied verbatim.
            let map = |v: usize, mode: usize| -> (usize, usize) {
                if v < 2 {
                    (v, 2 * copy + mode)
                } else {
                    (anc_base + v - 2, mode)
                }
            };
            let (gu, mu) = map(e.u(), e.mode_u());
            let (gv, mv) = map(e.v(), e.mode_v());
            edges.push(Edge::new(gu, gv, mu, mv, e.weight));
        }
    }
    Ok(Graph::new(dims, edges)?)
}

/// GHZ_{6+2n}^3 built from the committed six-particle seed solution.
pub fn construct_ghz_family_63(n: usize, assets: &Assets) -> Result<Graph, HaloError> {
    let _ = n;
    let _ = &assets.template;
    Err(HaloError::MissingTemplate(
        "six-plus-2n family assets are not committed yet".into(),
    ))
}

/// CNOT(2, 2k) built from the committed two-qubit gate solution.
pub fn construct_cnot(k: usize, assets: &Assets) -> Result<Graph, HaloError> {
    if k < 1 {
        return Err(HaloError::InvalidParam(
            "the gate family needs half-dimension k >= 1".into(),
        ));
    }
    let _ = &assets.template;
    Err(HaloError::MissingTemplate(
        "gate family assets are not committed yet".into(),
    ))
}
