//! JSON interchange for graphs, targets, templates, hypergraphs and reports.
//!
//! Writers are hand-rolled so output is byte-stable: canonical field order,
//! canonical edge order (inherited from [`Graph`]), and weights printed with
//! 17 significant digits, which round-trips every f64 exactly.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Deserialize;
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphError, VertexRole};
use crate::halo::{HaloError, HaloTemplate, Hyperedge, Hypergraph};
use crate::optimize::DiscoveryResult;
use crate::state::{Ket, StateVector};
use crate::target::{TargetError, TargetSpec};
use crate::verify::{Status, VerificationReport};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Halo(#[from] HaloError),
    #[error("invalid file: {0}")]
    Invalid(String),
}

/// Decimal form with enough digits to reconstruct the exact f64.
pub fn fmt_weight(w: f64) -> String {
    format!("{w:.16e}")
}

fn fmt_complex(a: Complex64) -> String {
    format!("[{}, {}]", fmt_weight(a.re), fmt_weight(a.im))
}

fn fmt_usize_list(values: impl IntoIterator<Item = usize>) -> String {
    let items: Vec<String> = values.into_iter().map(|v| v.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_edge(e: &Edge) -> String {
    format!(
        "[{}, {}, {}, {}, {}]",
        e.u(),
        e.v(),
        e.mode_u(),
        e.mode_v(),
        fmt_weight(e.weight)
    )
}

fn fmt_edge_block(edges: &[Edge], indent: &str) -> String {
    if edges.is_empty() {
        return "[]".to_string();
    }
    let rows: Vec<String> = edges.iter().map(|e| format!("{indent}  {}", fmt_edge(e))).collect();
    format!("[\n{}\n{indent}]", rows.join(",\n"))
}

// ---------------------------------------------------------------------------
// Graph

pub fn write_graph(g: &Graph) -> String {
    let roles: Vec<String> = g.roles().iter().map(|r| format!("\"{r}\"")).collect();
    format!(
        "{{\n  \"vertex_count\": {},\n  \"dimensions\": {},\n  \"roles\": [{}],\n  \"edges\": {}\n}}\n",
        g.vertex_count(),
        fmt_usize_list(g.dimensions().iter().copied()),
        roles.join(", "),
        fmt_edge_block(g.edges(), "  "),
    )
}

#[derive(Deserialize)]
struct GraphDto {
    vertex_count: usize,
    dimensions: Vec<usize>,
    #[serde(default)]
    roles: Option<Vec<String>>,
    edges: Vec<(usize, usize, usize, usize, f64)>,
}

fn graph_from_dto(dto: GraphDto) -> Result<Graph, IoError> {
    if dto.dimensions.len() != dto.vertex_count {
        return Err(IoError::Invalid(format!(
            "vertex_count {} but {} dimensions",
            dto.vertex_count,
            dto.dimensions.len()
        )));
    }
    let roles = match dto.roles {
        None => vec![VertexRole::Detector; dto.vertex_count],
        Some(names) => {
            if names.len() != dto.vertex_count {
                return Err(IoError::Invalid(format!(
                    "vertex_count {} but {} roles",
                    dto.vertex_count,
                    names.len()
                )));
            }
            names
                .iter()
                .map(|n| match n.as_str() {
                    "detector" => Ok(VertexRole::Detector),
                    "input" => Ok(VertexRole::Input),
                    other => Err(IoError::Invalid(format!("unknown role {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let edges = dto
        .edges
        .into_iter()
        .map(|(u, v, mu, mv, w)| Edge::new(u, v, mu, mv, w))
        .collect();
    Ok(Graph::with_roles(dto.dimensions, roles, edges)?)
}

pub fn read_graph(json: &str) -> Result<Graph, IoError> {
    graph_from_dto(serde_json::from_str(json)?)
}

// ---------------------------------------------------------------------------
// Target

pub fn write_target(t: &TargetSpec) -> String {
    let kets: Vec<String> = t.kets().iter().map(|k| format!("\"{k}\"")).collect();
    let all_real = t.amplitudes().iter().all(|a| a.im == 0.0);
    let amps: Vec<String> = t
        .amplitudes()
        .iter()
        .map(|a| {
            if all_real {
                fmt_weight(a.re)
            } else {
                fmt_complex(*a)
            }
        })
        .collect();
    format!(
        "{{\n  \"kets\": [{}],\n  \"amplitudes\": [{}],\n  \"dimensions\": {}\n}}\n",
        kets.join(", "),
        amps.join(", "),
        fmt_usize_list(t.dimensions().iter().copied()),
    )
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AmplitudeDto {
    Real(f64),
    Complex(f64, f64),
}

#[derive(Deserialize)]
struct TargetDto {
    kets: Vec<String>,
    amplitudes: Vec<AmplitudeDto>,
    dimensions: Vec<usize>,
}

pub fn read_target(json: &str) -> Result<TargetSpec, IoError> {
    let dto: TargetDto = serde_json::from_str(json)?;
    let kets = dto
        .kets
        .iter()
        .map(|s| {
            Ket::parse(s).ok_or_else(|| TargetError::ParseError { ket: s.clone() })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(IoError::Target)?;
    let amplitudes = dto
        .amplitudes
        .into_iter()
        .map(|a| match a {
            AmplitudeDto::Real(re) => Complex64::new(re, 0.0),
            AmplitudeDto::Complex(re, im) => Complex64::new(re, im),
        })
        .collect();
    Ok(TargetSpec::new(kets, amplitudes, dto.dimensions)?)
}

// ---------------------------------------------------------------------------
// State

pub fn write_state(s: &StateVector) -> String {
    let mut kets = String::new();
    let mut amps = String::new();
    for (i, (ket, amp)) in s.terms().enumerate() {
        if i > 0 {
            kets.push_str(", ");
            amps.push_str(", ");
        }
        let _ = write!(kets, "\"{ket}\"");
        amps.push_str(&fmt_complex(amp));
    }
    format!(
        "{{\n  \"kets\": [{kets}],\n  \"amplitudes\": [{amps}],\n  \"normalized\": {}\n}}\n",
        s.is_normalized(),
    )
}

// ---------------------------------------------------------------------------
// Halo template

pub fn write_template(t: &HaloTemplate) -> String {
    format!(
        "{{\n  \"main\": {},\n  \"main_modes\": {},\n  \"ancilla_count\": {},\n  \"herald_modes\": {},\n  \"subgraph\": {},\n  \"amplitude_degree\": {}\n}}\n",
        fmt_usize_list(t.main.iter().copied()),
        fmt_usize_list(t.main_modes.iter().copied()),
        t.ancilla_count,
        fmt_usize_list(t.herald_modes.iter().copied()),
        fmt_edge_block(&t.subgraph, "  "),
        t.amplitude_degree,
    )
}

#[derive(Deserialize)]
struct TemplateDto {
    main: Vec<usize>,
    main_modes: Vec<usize>,
    ancilla_count: usize,
    herald_modes: Vec<usize>,
    subgraph: Vec<(usize, usize, usize, usize, f64)>,
    amplitude_degree: usize,
}

pub fn read_template(json: &str) -> Result<HaloTemplate, IoError> {
    let dto: TemplateDto = serde_json::from_str(json)?;
    Ok(HaloTemplate {
        main: dto.main,
        main_modes: dto.main_modes,
        ancilla_count: dto.ancilla_count,
        herald_modes: dto.herald_modes,
        subgraph: dto
            .subgraph
            .into_iter()
            .map(|(u, v, mu, mv, w)| Edge::new(u, v, mu, mv, w))
            .collect(),
        amplitude_degree: dto.amplitude_degree,
    })
}

// ---------------------------------------------------------------------------
// Hypergraph

pub fn write_hypergraph(h: &Hypergraph) -> String {
    let base = write_graph(&h.base);
    let base = base.trim_end();
    let base_indented = base.replace('\n', "\n  ");
    let hyperedges: Vec<String> = h
        .hyperedges
        .iter()
        .map(|he| {
            format!(
                "    {{\"vertices\": {}, \"modes\": {}, \"weight\": {}}}",
                fmt_usize_list(he.vertices.iter().copied()),
                fmt_usize_list(he.modes.iter().copied()),
                fmt_weight(he.weight)
            )
        })
        .collect();
    let hyper_block = if hyperedges.is_empty() {
        "[]".to_string()
    } else {
        format!("[\n{}\n  ]", hyperedges.join(",\n"))
    };
    format!("{{\n  \"base\": {base_indented},\n  \"hyperedges\": {hyper_block}\n}}\n")
}

#[derive(Deserialize)]
struct HyperedgeDto {
    vertices: Vec<usize>,
    modes: Vec<usize>,
    weight: f64,
}

#[derive(Deserialize)]
struct HypergraphDto {
    base: serde_json::Value,
    hyperedges: Vec<HyperedgeDto>,
}

pub fn read_hypergraph(json: &str) -> Result<Hypergraph, IoError> {
    let dto: HypergraphDto = serde_json::from_str(json)?;
    let base = graph_from_dto(serde_json::from_value(dto.base)?)?;
    let hyperedges = dto
        .hyperedges
        .into_iter()
        .map(|he| Hyperedge {
            vertices: he.vertices,
            modes: he.modes,
            weight: he.weight,
        })
        .collect();
    Ok(Hypergraph::new(base, hyperedges)?)
}

/// True when the file holds a hypergraph rather than a plain graph.
pub fn looks_like_hypergraph(json: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(json)
        .map(|v| v.get("hyperedges").is_some())
        .unwrap_or(false)
}

// ---------------------------------------------------------------------------
// Discovery result and verification report

pub fn write_result(r: &DiscoveryResult) -> String {
    format!(
        "{{\n  \"fidelity\": {},\n  \"pm_count\": {},\n  \"edges\": {},\n  \"seed\": {}\n}}\n",
        fmt_weight(r.fidelity),
        r.pm_count,
        r.graph.edges().len(),
        r.seed_used,
    )
}

pub fn write_report(r: &VerificationReport) -> String {
    let mut out = String::from("{\n");
    let status = match r.status {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
    };
    let _ = writeln!(out, "  \"status\": \"{status}\",");
    if let Some(f) = r.fidelity {
        let _ = writeln!(out, "  \"fidelity\": {},", fmt_weight(f));
    }
    let _ = writeln!(out, "  \"residual\": {},", fmt_weight(r.residual));
    if let Some(h) = &r.herald {
        let _ = writeln!(out, "  \"herald\": \"{h}\",");
    }
    let _ = writeln!(out, "  \"zero_state\": {},", r.zero_state);
    let amps: Vec<String> = r
        .amplitudes
        .iter()
        .map(|((m, n), a)| {
            format!("    {{\"input\": [{m}, {n}], \"amplitude\": {}}}", fmt_complex(*a))
        })
        .collect();
    if amps.is_empty() {
        let _ = writeln!(out, "  \"amplitudes\": [],");
    } else {
        let _ = writeln!(out, "  \"amplitudes\": [\n{}\n  ],", amps.join(",\n"));
    }
    let violations: Vec<String> = r
        .violations
        .iter()
        .map(|v| {
            let input = match v.input {
                Some((m, n)) => format!("[{m}, {n}]"),
                None => "null".to_string(),
            };
            format!(
                "    {{\"input\": {input}, \"ket\": \"{}\", \"observed\": {}, \"expected\": {}}}",
                v.ket,
                fmt_complex(v.observed),
                fmt_complex(v.expected)
            )
        })
        .collect();
    if violations.is_empty() {
        let _ = writeln!(out, "  \"violations\": []");
    } else {
        let _ = writeln!(out, "  \"violations\": [\n{}\n  ]", violations.join(",\n"));
    }
    out.push_str("}\n");
    out
}
