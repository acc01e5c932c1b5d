//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with --nocapture). Tolerances are pinned in the asserts.
//!
//! Run with: cargo test --release -p halo-cli --test acceptance -- --nocapture

use std::collections::BTreeMap;
use std::sync::OnceLock;

use halo_core::graph::{complete_graph, enumerate_perfect_matchings, Edge, Graph, VertexRole};
use halo_core::halo::constructions::{self, Assets, Family};
use halo_core::halo::{extract_halo, validate_template};
use halo_core::optimize::{
    discover, fidelity, fidelity_gradient, optimize_weights, DiscoveryResult, EvalScratch,
    OptimizerConfig, PmEvaluator,
};
use halo_core::target::{cnot_choi, ghz, ghz_with_ancillas};
use halo_core::verify::{verify_gate, GateSpec};
use halo_core::{Ket, TargetSpec};

fn ghz43_graph() -> Graph {
    constructions::ghz43_graph(3).unwrap()
}

fn status(criterion: u32, pass: bool, detail: &str) -> bool {
    println!(
        "criterion {criterion}: {} - {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

// ---------------------------------------------------------------------------
// 1. GHZ_4^3: unit fidelity and exactly three perfect matchings.

#[test]
fn criterion_1_ghz43_exact() {
    let g = ghz43_graph();
    let target = ghz(4, 3).unwrap();
    let f = fidelity(&g, &target).unwrap();
    let pms = enumerate_perfect_matchings(&g).len();

    // Seeded discovery lands on the same six-edge class.
    let cfg = OptimizerConfig {
        restarts: 8,
        seed: 3,
        ..OptimizerConfig::default()
    };
    let found = discover(&target, &cfg).unwrap();

    let pass = f >= 1.0 - 1e-9
        && pms == 3
        && found.fidelity >= 1.0 - 1e-9
        && found.pm_count == 3
        && found.graph.edges().len() == 6;
    assert!(
        status(
            1,
            pass,
            &format!(
                "hand-built F = {f:.12} with {pms} matchings; discovery F = {:.12}, {} edges, {} matchings",
                found.fidelity,
                found.graph.edges().len(),
                found.pm_count
            )
        ),
        "criterion 1 failed"
    );
}

// ---------------------------------------------------------------------------
// 2. Impossibility echo: no 4-vertex graph reaches GHZ_4^4.

/// Maximum fidelity observed by the implementation oracle (grid plus
/// multi-restart ascent); frozen as a regression bound. The supremum is the
/// three-term overlap 3/4.
const IMPOSSIBILITY_BOUND: f64 = 0.750001;

#[test]
fn criterion_2_impossibility_echo() {
    let target = ghz(4, 4).unwrap();

    let full = complete_graph(4, &[4, 4, 4, 4]).unwrap();
    let mut observed = 0.0f64;
    for seed in 0..3 {
        let cfg = OptimizerConfig {
            restarts: 32,
            max_iters: 400,
            seed,
            ..OptimizerConfig::default()
        };
        let (_, f) = optimize_weights(&full, &target, &cfg).unwrap();
        observed = observed.max(f);
    }

    // Dense grid over the eight-weight fourth-mode attempt.
    let mut edges: Vec<Edge> = ghz43_graph().edges().to_vec();
    edges.push(Edge::new(0, 1, 3, 3, 1.0));
    edges.push(Edge::new(2, 3, 3, 3, 1.0));
    let fig2b = Graph::new(vec![4; 4], edges).unwrap();
    let ev = PmEvaluator::new(&fig2b, &target).unwrap();
    let mut scratch = EvalScratch::default();
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut idx = [0usize; 8];
    let mut w = [0.0f64; 8];
    'grid: loop {
        for (k, &i) in idx.iter().enumerate() {
            w[k] = grid[i];
        }
        observed = observed.max(ev.fidelity(&w, &mut scratch));
        let mut pos = 8;
        loop {
            if pos == 0 {
                break 'grid;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < grid.len() {
                break;
            }
            idx[pos] = 0;
        }
    }

    let pass = observed <= IMPOSSIBILITY_BOUND && observed < 1.0 && IMPOSSIBILITY_BOUND <= 0.95;
    assert!(
        status(
            2,
            pass,
            &format!("max fidelity over oracle: {observed:.9} (frozen bound {IMPOSSIBILITY_BOUND})")
        ),
        "criterion 2 failed"
    );
}

// ---------------------------------------------------------------------------
// 3 and 4 share one committed discovery run.

fn ghz44_discovery() -> &'static DiscoveryResult {
    static RESULT: OnceLock<DiscoveryResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        // Committed seed set: 30 restarts at seed 14, inside the 200-restart
        // budget the criterion allows.
        let cfg = OptimizerConfig {
            restarts: 30,
            max_iters: 300,
            seed: 14,
            ..OptimizerConfig::default()
        };
        discover(&ghz_with_ancillas(4, 4, 4).unwrap(), &cfg).expect("discovery reaches threshold")
    })
}

/// Per-matching classification of a solution against its target.
fn classify(g: &Graph, target: &TargetSpec) -> (usize, BTreeMap<Ket, Vec<f64>>, BTreeMap<Ket, Vec<f64>>) {
    let pms = enumerate_perfect_matchings(g);
    let mut target_pms: BTreeMap<Ket, Vec<f64>> = BTreeMap::new();
    let mut cross_pms: BTreeMap<Ket, Vec<f64>> = BTreeMap::new();
    for pm in &pms {
        let mut modes = vec![0u8; g.vertex_count()];
        let mut amp = 1.0;
        for e in pm.edges(g) {
            amp *= e.weight;
            modes[e.u()] = e.mode_u() as u8;
            modes[e.v()] = e.mode_v() as u8;
        }
        let ket = Ket(modes);
        if target.contains(&ket) {
            target_pms.entry(ket).or_default().push(amp);
        } else {
            cross_pms.entry(ket).or_default().push(amp);
        }
    }
    (pms.len(), target_pms, cross_pms)
}

#[test]
fn criterion_3_ghz44_discovery() {
    let result = ghz44_discovery();
    let target = ghz_with_ancillas(4, 4, 4).unwrap();
    let (pm_count, target_pms, cross_pms) = classify(&result.graph, &target);

    let reached = result.fidelity >= 0.99;

    // Constructive pairs: every GHZ term made by exactly two same-sign
    // matchings.
    let constructive_pairs = target_pms.len() == 4
        && target_pms
            .values()
            .all(|amps| amps.len() == 2 && amps[0].signum() == amps[1].signum());

    // Cancelling pairs: cross matchings pair up per ket and sum to zero.
    let cancelling = cross_pms.values().all(|amps| {
        amps.len() == 2 && (amps[0] + amps[1]).abs() <= 1e-9 * amps[0].abs().max(1.0)
    });
    let cross_count: usize = cross_pms.values().map(Vec::len).sum();

    // The paper reports 12 matchings with 2 cancelling pairs for its
    // solution; the sparsest class this implementation can realize (and, per
    // the search documented in the project notes, the sparsest consistent
    // with a clean emitter at all) has 16 with 4 cancelling pairs.
    let pass = reached && pm_count == 12 && constructive_pairs && cancelling && cross_count == 4;
    assert!(
        status(
            3,
            pass,
            &format!(
                "F = {:.12}; {pm_count} matchings ({} target in {} terms, {cross_count} cross), constructive pairs: {constructive_pairs}, cancelling pairs: {cancelling}",
                result.fidelity,
                target_pms.values().map(Vec::len).sum::<usize>(),
                target_pms.len()
            )
        ),
        "criterion 3 failed"
    );
}

/// The discovered solution carries its three clean pairings in three of the
/// four modes and emits the remaining mode through the ancillas; relabel so
/// the emitted mode is the top one, as the extraction convention expects.
fn normalized_solution() -> (Graph, Graph) {
    let result = ghz44_discovery();
    let g = &result.graph;
    let emitted: Vec<usize> = (0..4)
        .filter(|&m| {
            g.edges()
                .iter()
                .any(|e| e.v() >= 4 && e.u() < 4 && e.mode_u() == m)
        })
        .collect();
    assert_eq!(emitted.len(), 1, "one emitted mode expected");
    let emitted = emitted[0];
    let mut perm: Vec<usize> = (0..4).collect();
    perm.swap(emitted, 3);
    let perms: Vec<Vec<usize>> = (0..8)
        .map(|v| if v < 4 { perm.clone() } else { vec![0] })
        .collect();
    let relabeled = g.relabel_modes(&perms).unwrap();
    let base = Graph::new(
        vec![4; 4],
        relabeled
            .edges()
            .iter()
            .filter(|e| e.v() < 4 && e.mode_u() == e.mode_v() && e.mode_u() < 3)
            .cloned()
            .collect(),
    )
    .unwrap();
    (relabeled, base)
}

#[test]
fn criterion_4_template_extraction() {
    let (relabeled, base) = normalized_solution();
    let base_is_ghz43 = base.edges().len() == 6
        && fidelity(
            &Graph::new(vec![3; 4], base.edges().iter().map(|e| Edge::new(e.u(), e.v(), e.mode_u(), e.mode_v(), 1.0)).collect()).unwrap(),
            &ghz(4, 3).unwrap(),
        )
        .unwrap()
            >= 1.0 - 1e-9;

    match extract_halo(&relabeled, &[0, 1, 2, 3], &[4, 5, 6, 7], &base) {
        Ok(template) => {
            let report = validate_template(&template);
            let single = report.emissions.len() == 1
                && report.emissions[0].main_modes == vec![3, 3, 3, 3];
            let cross_residual = report
                .cross_terms
                .iter()
                .fold(0.0f64, |a, ct| a.max(ct.amplitude.abs()));
            let pass = base_is_ghz43 && report.pass && single && cross_residual <= 1e-9;
            assert!(
                status(
                    4,
                    pass,
                    &format!(
                        "extraction pass = {}, single |3333> emission = {single}, residual = {cross_residual:.2e}, base is the three-pairing graph: {base_is_ghz43}",
                        report.pass
                    )
                ),
                "criterion 4 failed"
            );
        }
        Err(e) => {
            status(4, false, &format!("extraction failed: {e}"));
            panic!("criterion 4 failed");
        }
    }
}

// ---------------------------------------------------------------------------
// 5. Generalized state creation.

#[test]
fn criterion_5_state_generalization() {
    let ghz_assets = Assets::builtin(Family::Ghz).unwrap();
    let mut detail = String::new();
    let mut pass = true;
    for d in [3usize, 4, 5, 6] {
        let g = constructions::construct_ghz(d, &ghz_assets.template).unwrap();
        let ancillas = g.vertex_count() - 4;
        let report = constructions::verify_construction(Family::Ghz, d, &g).unwrap();
        let ok = report.passed()
            && report.fidelity.unwrap() >= 1.0 - 1e-9
            && ancillas == 4 * (d - 3);
        pass &= ok;
        detail.push_str(&format!("ghz d={d}: {} anc, verified {}; ", ancillas, report.passed()));
    }

    match Assets::builtin(Family::Ghz63) {
        Ok(assets) => {
            for n in [0usize, 1, 2] {
                match constructions::construct_ghz_family_63(n, &assets) {
                    Ok(g) => {
                        let ancillas = g.vertex_count() - (6 + 2 * n);
                        let report =
                            constructions::verify_construction(Family::Ghz63, n, &g).unwrap();
                        let ok = report.passed() && ancillas == 2 * n;
                        pass &= ok;
                        detail.push_str(&format!(
                            "ghz63 n={n}: {} anc, verified {}; ",
                            ancillas,
                            report.passed()
                        ));
                    }
                    Err(e) => {
                        pass = false;
                        detail.push_str(&format!("ghz63 n={n}: {e}; "));
                    }
                }
            }
        }
        Err(e) => {
            pass = false;
            detail.push_str(&format!("ghz63 assets: {e}; "));
        }
    }
    assert!(status(5, pass, detail.trim_end()), "criterion 5 failed");
}

// ---------------------------------------------------------------------------
// 6. Entanglement swapping.

#[test]
fn criterion_6_swapping() {
    let assets = Assets::builtin(Family::Swap).unwrap();
    let mut pass = true;
    let mut detail = String::new();
    for k in [1usize, 2, 3] {
        let g = constructions::construct_swapping(k, &assets.template).unwrap();
        let no_party_edges = g.edges().iter().all(|e| !(e.u() == 0 && e.v() == 1));
        let ancillas = g.vertex_count() - 2;
        let report = constructions::verify_construction(Family::Swap, k, &g).unwrap();
        let ok = no_party_edges && ancillas == 2 * k && report.passed();
        pass &= ok;
        detail.push_str(&format!(
            "k={k}: {} anc, no a-b edges {no_party_edges}, verified {}; ",
            ancillas,
            report.passed()
        ));
    }
    let g1 = constructions::construct_swapping(1, &assets.template).unwrap();
    let pm1 = enumerate_perfect_matchings(&g1).len();
    pass &= pm1 == 2;
    detail.push_str(&format!("k=1 matchings: {pm1}"));
    assert!(status(6, pass, &detail), "criterion 6 failed");
}

// ---------------------------------------------------------------------------
// 7. CNOT gates.

#[test]
fn criterion_7_cnot() {
    // Discovered CNOT(2,2): the gate target as a state over the inputs too,
    // with input-input edges forbidden.
    let cfg = OptimizerConfig {
        restarts: 16,
        seed: 4,
        fixed_vertices: vec![(0, 1)],
        ancillas: 4,
        ..OptimizerConfig::default()
    };
    let result = discover(&cnot_choi(2, 2, 0).unwrap(), &cfg).unwrap();
    let gated = Graph::with_roles(
        result.graph.dimensions().to_vec(),
        {
            let mut roles = vec![VertexRole::Detector; 8];
            roles[0] = VertexRole::Input;
            roles[1] = VertexRole::Input;
            roles
        },
        result.graph.edges().to_vec(),
    )
    .unwrap();
    let report22 = verify_gate(&gated, &GateSpec::cnot(2, 2, 4), 1e-6).unwrap();
    let uniform = {
        let mags: Vec<f64> = report22.amplitudes.iter().map(|(_, a)| a.norm()).collect();
        let max = mags.iter().cloned().fold(0.0f64, f64::max);
        let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min - 1.0
    };
    let mut pass = report22.passed() && uniform <= 1e-6 && report22.amplitudes.len() == 4;
    let mut detail = format!(
        "discovered CNOT(2,2): verified {}, amplitude uniformity {uniform:.2e}; ",
        report22.passed()
    );

    match Assets::builtin(Family::Cnot) {
        Ok(assets) => match constructions::construct_cnot(2, &assets) {
            Ok(g) => {
                let ancillas = g.vertex_count() - 4;
                let report = constructions::verify_construction(Family::Cnot, 2, &g).unwrap();
                let ok = report.passed() && ancillas == 8 && report.amplitudes.len() == 8;
                pass &= ok;
                detail.push_str(&format!(
                    "CNOT(2,4): {} anc, {} inputs verified {}",
                    ancillas,
                    report.amplitudes.len(),
                    report.passed()
                ));
            }
            Err(e) => {
                pass = false;
                detail.push_str(&format!("CNOT(2,4): {e}"));
            }
        },
        Err(e) => {
            pass = false;
            detail.push_str(&format!("cnot assets: {e}"));
        }
    }
    assert!(status(7, pass, &detail), "criterion 7 failed");
}

// ---------------------------------------------------------------------------
// 8. Numerical property suite.

/// Brute-force reference: sum over all edge subsets of size V/2 that cover
/// every vertex exactly once.
fn oracle_state(g: &Graph) -> BTreeMap<Ket, f64> {
    let n = g.vertex_count();
    let mut terms = BTreeMap::new();
    if n % 2 != 0 {
        return terms;
    }
    let k = n / 2;
    let m = g.edges().len();
    if m < k {
        return terms;
    }
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let mut cover = vec![0u8; n];
        let mut amp = 1.0;
        let mut modes = vec![0u8; n];
        for &i in &pick {
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
        // next combination
        let mut i = k;
        let mut done = true;
        while i > 0 {
            i -= 1;
            if pick[i] != i + m - k {
                pick[i] += 1;
                for j in (i + 1)..k {
                    pick[j] = pick[j - 1] + 1;
                }
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }
    terms.retain(|_, a| a.abs() > halo_core::AMPLITUDE_EPSILON);
    terms
}

fn random_graph(rng: &mut impl rand::Rng, max_vertices: usize) -> Graph {
    let n = 2 * rng.random_range(1..=max_vertices / 2);
    let dims: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let mut edges = Vec::new();
    let mut keys = std::collections::BTreeSet::new();
    for _ in 0..12 {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let e = Edge::new(
            u,
            v,
            rng.random_range(0..dims[u]),
            rng.random_range(0..dims[v]),
            rng.random_range(-2.0..2.0),
        );
        if keys.insert(e.key()) {
            edges.push(e);
        }
    }
    Graph::new(dims, edges).unwrap()
}

#[test]
fn criterion_8_numerical_properties() {
    use rand::{Rng, SeedableRng};
    let _ = |r: &mut rand_chacha::ChaCha8Rng| -> f64 { r.random() };

    // (a) double-factorial matching counts.
    let mut counts_ok = true;
    for (n, expected) in [(2usize, 1usize), (4, 3), (6, 15), (8, 105)] {
        let g = complete_graph(n, &vec![1; n]).unwrap();
        counts_ok &= enumerate_perfect_matchings(&g).len() == expected;
    }

    // (b) analytic gradient against central differences on 100 seeded graphs.
    let mut grad_worst = 0.0f64;
    for seed in 0..100u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dims = vec![rng.random_range(2..=4); 4];
        let full = complete_graph(4, &dims).unwrap();
        let weights: Vec<f64> = (0..full.edges().len())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let g = full.with_weights(&weights).unwrap();
        let t = ghz(4, dims[0]).unwrap();
        let analytic = fidelity_gradient(&g, &t).unwrap();
        let h = 1e-5;
        for e in 0..weights.len() {
            let mut p = weights.clone();
            p[e] += h;
            let mut m = weights.clone();
            m[e] -= h;
            let fd = (fidelity(&g.with_weights(&p).unwrap(), &t).unwrap()
                - fidelity(&g.with_weights(&m).unwrap(), &t).unwrap())
                / (2.0 * h);
            grad_worst = grad_worst.max((analytic[e] - fd).abs());
        }
    }
    let grad_ok = grad_worst <= 1e-6;

    // (c) exact scale invariance of the fidelity, against targets drawn on
    // each graph's own mode structure.
    let mut scale_worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + seed);
        let g = random_graph(&mut rng, 6);
        if g.edges().is_empty() {
            continue;
        }
        let kets: Vec<Ket> = (0..2)
            .map(|_| {
                Ket(g.dimensions()
                    .iter()
                    .map(|&d| rng.random_range(0..d) as u8)
                    .collect())
            })
            .collect();
        let mut amps = vec![num_complex::Complex64::new(1.0, 0.0); kets.len()];
        amps.truncate(kets.len());
        let Ok(t) = TargetSpec::new(kets, amps, g.dimensions().to_vec()) else {
            continue;
        };
        let f0 = fidelity(&g, &t).unwrap();
        for lambda in [2.0, 0.5, -3.0, 1e3] {
            let w: Vec<f64> = g.edges().iter().map(|e| e.weight * lambda).collect();
            let f = fidelity(&g.with_weights(&w).unwrap(), &t).unwrap();
            scale_worst = scale_worst.max((f - f0).abs());
        }
    }
    let scale_ok = scale_worst <= 1e-12;

    // (d) matching state equals the subset-enumeration oracle on 200 random
    // graphs.
    let mut oracle_ok = true;
    for seed in 0..200u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5000 + seed);
        let g = random_graph(&mut rng, 6);
        let fast = halo_core::state_from_graph(&g).unwrap();
        let slow = oracle_state(&g);
        let kets: std::collections::BTreeSet<Ket> = fast
            .terms()
            .map(|(k, _)| k.clone())
            .chain(slow.keys().cloned())
            .collect();
        for ket in kets {
            let a = fast.amplitude(&ket).re;
            let b = slow.get(&ket).copied().unwrap_or(0.0);
            if (a - b).abs() > 1e-9 {
                oracle_ok = false;
            }
        }
    }

    let pass = counts_ok && grad_ok && scale_ok && oracle_ok;
    assert!(
        status(
            8,
            pass,
            &format!(
                "matching counts {counts_ok}; gradient worst {grad_worst:.2e}; scale worst {scale_worst:.2e}; oracle agreement {oracle_ok}"
            )
        ),
        "criterion 8 failed"
    );
}

// ---------------------------------------------------------------------------
// 9. Byte-identical pipeline reruns.

#[test]
fn criterion_9_determinism() {
    let dir = std::env::temp_dir().join(format!("halo-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("job.json");
    std::fs::write(
        &config,
        r#"{
          "target": {"ghz": {"particles": 4, "dimension": 3}},
          "optimizer": {"restarts": 6, "seed": 11}
        }"#,
    )
    .unwrap();

    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_halo"))
            .args([
                "discover",
                "--config",
                config.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success(), "{status:?}");
        let graph = std::fs::read(out.join("graph.json")).unwrap();
        let result = std::fs::read(out.join("result.json")).unwrap();
        let svg_path = out.join("graph.svg");
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_halo"))
            .args([
                "export",
                "--graph",
                out.join("graph.json").to_str().unwrap(),
                "--format",
                "svg",
                "--out",
                svg_path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success());
        (graph, result, std::fs::read(svg_path).unwrap())
    };

    let a = run(&dir.join("a"));
    let b = run(&dir.join("b"));
    let pass = a == b;
    assert!(
        status(
            9,
            pass,
            &format!(
                "graph/result/svg byte-identical across reruns: {} / {} / {}",
                a.0 == b.0,
                a.1 == b.1,
                a.2 == b.2
            )
        ),
        "criterion 9 failed"
    );
}
