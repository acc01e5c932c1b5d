//! Graph rendering: DOT for graphviz and a self-contained SVG with a
//! deterministic circular layout. Every colored edge is drawn in two halves,
//! one per endpoint mode; negative weights are dashed; hyperedges become
//! outlines enclosing the vertices they connect.

use std::fmt::Write;

use halo_core::graph::VertexRole;
use halo_core::{Graph, Hypergraph};

/// Mode colors: blue, red, green, orange, then cycling through the rest.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

pub fn mode_color(mode: usize) -> &'static str {
    PALETTE[mode % PALETTE.len()]
}

pub fn graph_dot(g: &Graph) -> String {
    let mut out = String::from("graph experiment {\n  layout=circo;\n");
    for v in 0..g.vertex_count() {
        let shape = match g.role(v) {
            VertexRole::Detector => "circle",
            VertexRole::Input => "square",
        };
        let _ = writeln!(out, "  {v} [shape={shape}, label=\"{v}\"];");
    }
    for e in g.edges() {
        let style = if e.weight < 0.0 { ", style=dashed" } else { "" };
        let _ = writeln!(
            out,
            "  {} -- {} [color=\"{};0.5:{}\", penwidth=2{}, tooltip=\"w={:.6}\"];",
            e.u(),
            e.v(),
            mode_color(e.mode_u()),
            mode_color(e.mode_v()),
            style,
            e.weight
        );
    }
    out.push_str("}\n");
    out
}

pub fn hypergraph_dot(h: &Hypergraph) -> String {
    let mut out = graph_dot(&h.base);
    out.truncate(out.len() - 2); // reopen before the closing brace
    for (i, he) in h.hyperedges.iter().enumerate() {
        // DOT has no hyperedges; emit a labelled junction node instead.
        let _ = writeln!(
            out,
            "  h{i} [shape=point, width=0.12, color=\"{}\"];",
            mode_color(he.modes[0])
        );
        for (&v, &m) in he.vertices.iter().zip(&he.modes) {
            let _ = writeln!(
                out,
                "  h{i} -- {v} [color=\"{}\", penwidth=2, style=bold];",
                mode_color(m)
            );
        }
    }
    out.push_str("}\n");
    out
}

struct Layout {
    positions: Vec<(f64, f64)>,
}

impl Layout {
    fn circular(n: usize) -> Layout {
        let (cx, cy, r) = (260.0, 260.0, 200.0);
        let positions = (0..n)
            .map(|i| {
                let angle = std::f64::consts::TAU * i as f64 / n.max(1) as f64
                    - std::f64::consts::FRAC_PI_2;
                (cx + r * angle.cos(), cy + r * angle.sin())
            })
            .collect();
        Layout { positions }
    }
}

fn fmt2(x: f64) -> String {
    format!("{x:.2}")
}

/// Two-half quadratic curve between vertex positions, bowed out for parallel
/// edges so every colored variant stays visible.
fn edge_path(
    out: &mut String,
    p0: (f64, f64),
    p1: (f64, f64),
    bow: f64,
    color_u: &str,
    color_v: &str,
    dashed: bool,
    tooltip: &str,
) {
    let mid = ((p0.0 + p1.0) / 2.0, (p0.1 + p1.1) / 2.0);
    let (dx, dy) = (p1.0 - p0.0, p1.1 - p0.1);
    let len = (dx * dx + dy * dy).sqrt().max(1e-9);
    let normal = (-dy / len, dx / len);
    let ctrl = (mid.0 + bow * normal.0, mid.1 + bow * normal.1);
    // Split the quadratic at t = 1/2: halves keep the exact same shape.
    let c0 = ((p0.0 + ctrl.0) / 2.0, (p0.1 + ctrl.1) / 2.0);
    let c1 = ((ctrl.0 + p1.0) / 2.0, (ctrl.1 + p1.1) / 2.0);
    let apex = (
        0.25 * p0.0 + 0.5 * ctrl.0 + 0.25 * p1.0,
        0.25 * p0.1 + 0.5 * ctrl.1 + 0.25 * p1.1,
    );
    let dash = if dashed { " stroke-dasharray=\"7,4\"" } else { "" };
    for (from, c, to, color) in [(p0, c0, apex, color_u), (apex, c1, p1, color_v)] {
        let _ = writeln!(
            out,
            "  <path d=\"M {} {} Q {} {} {} {}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2.5\"{dash}><title>{tooltip}</title></path>",
            fmt2(from.0),
            fmt2(from.1),
            fmt2(c.0),
            fmt2(c.1),
            fmt2(to.0),
            fmt2(to.1),
        );
    }
}

fn svg_header() -> String {
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"520\" height=\"520\" viewBox=\"0 0 520 520\">\n  <rect width=\"520\" height=\"520\" fill=\"white\"/>\n".to_string()
}

fn svg_vertices(out: &mut String, g: &Graph, layout: &Layout) {
    for v in 0..g.vertex_count() {
        let (x, y) = layout.positions[v];
        match g.role(v) {
            VertexRole::Detector => {
                let _ = writeln!(
                    out,
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"13\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>",
                    fmt2(x),
                    fmt2(y)
                );
            }
            VertexRole::Input => {
                let _ = writeln!(
                    out,
                    "  <rect x=\"{}\" y=\"{}\" width=\"26\" height=\"26\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>",
                    fmt2(x - 13.0),
                    fmt2(y - 13.0)
                );
            }
        }
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" dominant-baseline=\"central\">{v}</text>",
            fmt2(x),
            fmt2(y)
        );
    }
}

fn svg_edges(out: &mut String, g: &Graph, layout: &Layout) {
    // Parallel colored edges on a vertex pair fan out with distinct bows.
    let mut pair_seen: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new();
    let mut pair_total: std::collections::BTreeMap<(usize, usize), usize> =
        std::collections::BTreeMap::new();
    for e in g.edges() {
        *pair_total.entry((e.u(), e.v())).or_insert(0) += 1;
    }
    for e in g.edges() {
        let k = pair_seen.entry((e.u(), e.v())).or_insert(0);
        let total = pair_total[&(e.u(), e.v())];
        let bow = (*k as f64 - (total as f64 - 1.0) / 2.0) * 26.0;
        *k += 1;
        let tooltip = format!(
            "({},{}) modes ({},{}) w={:.6}",
            e.u(),
            e.v(),
            e.mode_u(),
            e.mode_v(),
            e.weight
        );
        edge_path(
            out,
            layout.positions[e.u()],
            layout.positions[e.v()],
            bow,
            mode_color(e.mode_u()),
            mode_color(e.mode_v()),
            e.weight < 0.0,
            &tooltip,
        );
    }
}

pub fn graph_svg(g: &Graph) -> String {
    let layout = Layout::circular(g.vertex_count());
    let mut out = svg_header();
    svg_edges(&mut out, g, &layout);
    svg_vertices(&mut out, g, &layout);
    out.push_str("</svg>\n");
    out
}

pub fn hypergraph_svg(h: &Hypergraph) -> String {
    let layout = Layout::circular(h.base.vertex_count());
    let mut out = svg_header();
    // Hyperedges first so their outlines sit behind everything.
    for he in &h.hyperedges {
        let cx = he.vertices.iter().map(|&v| layout.positions[v].0).sum::<f64>()
            / he.vertices.len() as f64;
        let cy = he.vertices.iter().map(|&v| layout.positions[v].1).sum::<f64>()
            / he.vertices.len() as f64;
        // Shape enclosing the member vertices: each corner pushed out from
        // the centroid, ordered by angle so the outline does not self-cross.
        let mut corners: Vec<(f64, f64, f64)> = he
            .vertices
            .iter()
            .map(|&v| {
                let (x, y) = layout.positions[v];
                let (dx, dy) = (x - cx, y - cy);
                let len = (dx * dx + dy * dy).sqrt().max(1e-9);
                let push = 30.0;
                (
                    dy.atan2(dx),
                    x + push * dx / len,
                    y + push * dy / len,
                )
            })
            .collect();
        corners.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<String> = corners
            .iter()
            .map(|&(_, x, y)| format!("{},{}", fmt2(x), fmt2(y)))
            .collect();
        let _ = writeln!(
            out,
            "  <polygon points=\"{}\" fill=\"{}\" fill-opacity=\"0.12\" stroke=\"{}\" stroke-width=\"2\" stroke-dasharray=\"10,5\"/>",
            points.join(" "),
            mode_color(he.modes[0]),
            mode_color(he.modes[0]),
        );
    }
    svg_edges(&mut out, &h.base, &layout);
    svg_vertices(&mut out, &h.base, &layout);
    out.push_str("</svg>\n");
    out
}
