//! Exhaustive structure search for the sparsest fourth-mode emitter, ignored
//! by default: enumerate which mode-3 edges and ancilla edges to add to the
//! three-pairing base so the graph has exactly 12 perfect matchings split as
//! 8 constructive (two per GHZ term) plus 4 cancelling, then ask the weight
//! optimizer whether each candidate actually reaches unit fidelity.
//!
//! `cargo test --release -p halo-core --test dev_structure_search -- --ignored --nocapture`

use halo_core::graph::{Edge, Graph};
use halo_core::optimize::{optimize_weights, OptimizerConfig};
use halo_core::target::ghz_with_ancillas;

/// Ancilla pair index: 45,67 | 46,57 | 47,56 pairings.
const ANC_PAIRS: [(usize, usize); 6] = [(4, 5), (6, 7), (4, 6), (5, 7), (4, 7), (5, 6)];
const MAIN_PAIRS: [(usize, usize); 6] = [(0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2)];
// Base pairings by mode: mode 0 -> {01, 23}, mode 1 -> {02, 13}, mode 2 -> {03, 12}.

fn anc_cover_count(anc: u32) -> usize {
    let has = |i: usize| anc & (1 << i) != 0;
    [(0, 1), (2, 3), (4, 5)]
        .iter()
        .filter(|&&(a, b)| has(a) && has(b))
        .count()
}

/// ma bit layout: bit (main * 4 + anc) for edge main -> ancilla (4 + anc).
fn ma_has(ma: u32, main: usize, anc: usize) -> bool {
    ma & (1 << (main * 4 + anc)) != 0
}

/// Number of ways to cover {x, y} + all four ancillas using two ma edges and
/// one ancilla edge.
fn macov(ma: u32, anc: u32, x: usize, y: usize) -> usize {
    let mut count = 0;
    for i in 0..4 {
        for j in 0..4 {
            if i == j || !ma_has(ma, x, i) || !ma_has(ma, y, j) {
                continue;
            }
            let rem: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            let pair_idx = ANC_PAIRS
                .iter()
                .position(|&(a, b)| (a - 4, b - 4) == (rem[0], rem[1]));
            if let Some(p) = pair_idx {
                if anc & (1 << p) != 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Bipartite perfect matchings of the ma graph (mains to ancillas).
fn perm4(ma: u32) -> usize {
    let mut count = 0;
    let mut used = [false; 4];
    fn rec(ma: u32, main: usize, used: &mut [bool; 4], count: &mut usize) {
        if main == 4 {
            *count += 1;
            return;
        }
        for anc in 0..4 {
            if !used[anc] && ma_has(ma, main, anc) {
                used[anc] = true;
                rec(ma, main + 1, used, count);
                used[anc] = false;
            }
        }
    }
    rec(ma, 0, &mut used, &mut count);
    count
}

fn build_graph(ma: u32, mm3: u32, anc: u32) -> Graph {
    let mut edges = vec![
        Edge::new(0, 1, 0, 0, 1.0),
        Edge::new(2, 3, 0, 0, 1.0),
        Edge::new(0, 2, 1, 1, 1.0),
        Edge::new(1, 3, 1, 1, 1.0),
        Edge::new(0, 3, 2, 2, 1.0),
        Edge::new(1, 2, 2, 2, 1.0),
    ];
    for (i, &(u, v)) in MAIN_PAIRS.iter().enumerate() {
        if mm3 & (1 << i) != 0 {
            edges.push(Edge::new(u, v, 3, 3, 1.0));
        }
    }
    for main in 0..4 {
        for anc in 0..4 {
            if ma_has(ma, main, anc) {
                edges.push(Edge::new(main, 4 + anc, 3, 0, 1.0));
            }
        }
    }
    for (i, &(u, v)) in ANC_PAIRS.iter().enumerate() {
        if anc & (1 << i) != 0 {
            edges.push(Edge::new(u, v, 0, 0, 1.0));
        }
    }
    Graph::new(vec![4, 4, 4, 4, 1, 1, 1, 1], edges).unwrap()
}

#[test]
#[ignore]
fn search_twelve_matching_emitters() {
    // Ancilla sets with exactly two pairings available.
    let anc_options: Vec<u32> = (0u32..64).filter(|&a| anc_cover_count(a) == 2).collect();
    println!("anc options: {}", anc_options.len());

    let mm3_pairing = |mm3: u32| -> usize {
        [(0usize, 1usize), (2, 3), (4, 5)]
            .iter()
            .filter(|&&(a, b)| mm3 & (1 << a) != 0 && mm3 & (1 << b) != 0)
            .count()
    };
    let comp_pair = |i: usize| -> usize {
        // complement of main pair i within {0..3}: 01<->23, 02<->13, 03<->12
        i ^ 1
    };

    let mut candidates = Vec::new();
    for &anc in &anc_options {
        for mm3 in 0u32..64 {
            let pairings = mm3_pairing(mm3);
            for ma in 0u32..(1 << 16) {
                // Fulls: pairings of mm3 edges x 2 covers, plus each mm3 edge
                // with a macov of its complement pair, plus bipartite perms.
                let mut fulls = 2 * pairings + perm4(ma);
                if fulls > 2 {
                    continue;
                }
                for i in 0..6 {
                    if mm3 & (1 << i) != 0 {
                        let (x, y) = MAIN_PAIRS[comp_pair(i)];
                        fulls += macov(ma, anc, x, y);
                        if fulls > 2 {
                            break;
                        }
                    }
                }
                if fulls != 2 {
                    continue;
                }
                // Partials: per main pair S, covers = 2*[S in mm3] + macov(S).
                let mut partials = 0;
                let mut ok = true;
                for i in 0..6 {
                    let (x, y) = MAIN_PAIRS[i];
                    let c = 2 * ((mm3 >> i) & 1) as usize + macov(ma, anc, x, y);
                    if c % 2 != 0 {
                        ok = false; // unpairable cross term
                        break;
                    }
                    partials += c;
                }
                if ok && partials == 4 {
                    candidates.push((ma, mm3, anc));
                }
            }
        }
    }
    println!("structural candidates: {}", candidates.len());

    let mut hits = 0;
    for &(ma, mm3, anc) in &candidates {
        let g = build_graph(ma, mm3, anc);
        let target = ghz_with_ancillas(4, 4, 4).unwrap();
        let cfg = OptimizerConfig {
            restarts: 6,
            max_iters: 250,
            seed: 1,
            ..OptimizerConfig::default()
        };
        let (_, f) = optimize_weights(&g, &target, &cfg).unwrap();
        if f > 1.0 - 1e-9 {
            hits += 1;
            println!(
                "HIT f={f:.12} edges={} ma={ma:016b} mm3={mm3:06b} anc={anc:06b}",
                g.edges().len()
            );
            if hits <= 3 {
                for e in g.edges() {
                    println!(
                        "    ({},{}) modes ({},{})",
                        e.u(),
                        e.v(),
                        e.mode_u(),
                        e.mode_v()
                    );
                }
            }
        }
        if hits >= 40 {
            break;
        }
    }
    println!("unit-fidelity hits: {hits} / {}", candidates.len());
}
