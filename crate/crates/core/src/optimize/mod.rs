//! Discovery of experiment graphs by fidelity maximization: seeded
//! multi-restart gradient ascent over edge weights on a fixed topology, plus
//! a topological loop that prunes the smallest-weight edge while the fidelity
//! threshold holds.

mod evaluator;

pub use evaluator::{EvalScratch, PmEvaluator};

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{complete_graph, Graph, GraphError};
use crate::target::TargetSpec;

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("no solution at threshold; best fidelity on the complete graph was {best_fidelity}")]
    NoSolution { best_fidelity: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Step-size schedule: a base learning rate decayed geometrically per
/// iteration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepRule {
    pub learning_rate: f64,
    pub decay: f64,
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule {
            learning_rate: 0.05,
            decay: 0.998,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerConfig {
    #[serde(default = "defaults::restarts")]
    pub restarts: usize,
    #[serde(default = "defaults::max_iters")]
    pub max_iters: usize,
    #[serde(default)]
    pub step_rule: StepRule,
    #[serde(default = "defaults::init_range")]
    pub init_range: (f64, f64),
    #[serde(default = "defaults::prune_threshold")]
    pub prune_threshold_fidelity: f64,
    #[serde(default)]
    pub seed: u64,
    /// Forbidden vertex pairs: no edge between them in any mode. Used for
    /// structural constraints such as "no common source for the two swapped
    /// particles" or "no edges between gate inputs".
    #[serde(default)]
    pub fixed_vertices: Vec<(usize, usize)>,
    /// Herald particles appended to the target (dimension 1, mode 0).
    #[serde(default)]
    pub ancillas: usize,
}

mod defaults {
    pub fn restarts() -> usize {
        40
    }
    pub fn max_iters() -> usize {
        400
    }
    pub fn init_range() -> (f64, f64) {
        (-1.0, 1.0)
    }
    pub fn prune_threshold() -> f64 {
        0.99
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: defaults::restarts(),
            max_iters: defaults::max_iters(),
            step_rule: StepRule::default(),
            init_range: defaults::init_range(),
            prune_threshold_fidelity: defaults::prune_threshold(),
            seed: 0,
            fixed_vertices: Vec::new(),
            ancillas: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        if self.restarts == 0 {
            return Err(OptimizeError::InvalidConfig("restarts must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(OptimizeError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.step_rule.learning_rate > 0.0) {
            return Err(OptimizeError::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if !(self.step_rule.decay > 0.0 && self.step_rule.decay <= 1.0) {
            return Err(OptimizeError::InvalidConfig(
                "decay must be in (0, 1]".into(),
            ));
        }
        if !(self.prune_threshold_fidelity > 0.0 && self.prune_threshold_fidelity <= 1.0) {
            return Err(OptimizeError::InvalidConfig(
                "prune_threshold_fidelity must be in (0, 1]".into(),
            ));
        }
        if !(self.init_range.0 < self.init_range.1) {
            return Err(OptimizeError::InvalidConfig(
                "init_range must be a nonempty interval".into(),
            ));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Outcome of a discovery run. The stored fidelity is recomputed from the
/// emitted graph, so it re-verifies exactly.
#[derive(Debug, Clone)]
pub struct DiscoveryResult {
    pub graph: Graph,
    pub fidelity: f64,
    pub pm_count: usize,
    pub iterations_used: usize,
    pub seed_used: u64,
}

/// F = |⟨t|ψ(g)⟩|² / ⟨ψ(g)|ψ(g)⟩ with ψ unnormalized; 0 for the zero state.
pub fn fidelity(g: &Graph, t: &TargetSpec) -> Result<f64, OptimizeError> {
    let ev = PmEvaluator::new(g, t)?;
    let w: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    Ok(ev.fidelity(&w, &mut EvalScratch::default()))
}

/// Analytic ∂F/∂w per edge, in the graph's canonical edge order.
pub fn fidelity_gradient(g: &Graph, t: &TargetSpec) -> Result<Vec<f64>, OptimizeError> {
    let ev = PmEvaluator::new(g, t)?;
    let w: Vec<f64> = g.edges().iter().map(|e| e.weight).collect();
    let mut grad = vec![0.0; w.len()];
    ev.fidelity_grad(&w, &mut EvalScratch::default(), &mut grad);
    Ok(grad)
}

const CONVERGED: f64 = 1.0 - 1e-14;

struct Ascent {
    fidelity: f64,
    iterations: usize,
}

/// Adaptive-moment gradient ascent: the exploration phase. The step rule's
/// learning rate decays geometrically per iteration.
fn ascend(
    ev: &PmEvaluator,
    w: &mut [f64],
    iters: usize,
    rule: StepRule,
    scratch: &mut EvalScratch,
) -> Ascent {
    let n = w.len();
    let mut grad = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (b1, b2, eps): (f64, f64, f64) = (0.9, 0.999, 1e-12);
    let mut lr = rule.learning_rate;
    let mut f = 0.0;
    let mut used = 0;
    for it in 0..iters {
        f = ev.fidelity_grad(w, scratch, &mut grad);
        used = it + 1;
        if f > CONVERGED {
            break;
        }
        let bc1 = 1.0 - b1.powi(it as i32 + 1);
        let bc2 = 1.0 - b2.powi(it as i32 + 1);
        for e in 0..n {
            m[e] = b1 * m[e] + (1.0 - b1) * grad[e];
            v[e] = b2 * v[e] + (1.0 - b2) * grad[e] * grad[e];
            w[e] += lr * (m[e] / bc1) / ((v[e] / bc2).sqrt() + eps);
        }
        lr *= rule.decay;
        rescale_if_drifting(w);
    }
    Ascent {
        fidelity: f,
        iterations: used,
    }
}

/// Monotone backtracking ascent: the polishing phase. Deterministic, never
/// decreases the fidelity, and converges as the gradient vanishes.
fn polish(ev: &PmEvaluator, w: &mut Vec<f64>, max_iters: usize, scratch: &mut EvalScratch) -> Ascent {
    let n = w.len();
    let mut grad = vec![0.0; n];
    let mut lr = 0.05;
    let mut f = ev.fidelity(w, scratch);
    let mut candidate = vec![0.0; n];
    let mut used = 0;
    for it in 0..max_iters {
        used = it + 1;
        if f > CONVERGED {
            break;
        }
        ev.fidelity_grad(w, scratch, &mut grad);
        let mut improved = false;
        for _ in 0..40 {
            for e in 0..n {
                candidate[e] = w[e] + lr * grad[e];
            }
            let fc = ev.fidelity(&candidate, scratch);
            if fc > f {
                w.copy_from_slice(&candidate);
                f = fc;
                lr *= 1.4;
                improved = true;
                break;
            }
            lr *= 0.5;
            if lr < 1e-16 {
                break;
            }
        }
        if !improved {
            break;
        }
        rescale_if_drifting(w);
    }
    Ascent {
        fidelity: f,
        iterations: used,
    }
}

/// Global rescaling is a gauge move (every matching covers all vertices, so
/// all amplitudes pick up the same factor); use it to keep weights in a sane
/// range.
fn rescale_if_drifting(w: &mut [f64]) {
    let max = w.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    if max > 1e3 || (max < 1e-3 && max > 0.0) {
        let s = 1.0 / max;
        for x in w.iter_mut() {
            *x *= s;
        }
    }
}

fn init_weights(rng: &mut ChaCha8Rng, ev: &PmEvaluator, range: (f64, f64)) -> Vec<f64> {
    let dist = Uniform::new_inclusive(range.0, range.1).expect("validated range");
    // Dead edges keep weight zero so masked graphs stay reproducible.
    (0..ev.edge_count())
        .map(|e| if ev.is_alive(e) { dist.sample(rng) } else { 0.0 })
        .collect()
}

fn restart_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct RestartOutcome {
    weights: Vec<f64>,
    fidelity: f64,
    iterations: usize,
}

/// Best-of-restarts ascent. Restarts run in parallel on independent PRNG
/// streams derived from (seed, stream_base + index); the reduction is by
/// fidelity with the lowest restart index winning ties, so parallel and
/// serial schedules agree.
fn run_restarts(
    ev: &PmEvaluator,
    cfg: &OptimizerConfig,
    restarts: usize,
    stream_base: u64,
) -> RestartOutcome {
    let outcomes: Vec<(f64, Vec<f64>, usize)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut scratch = EvalScratch::default();
            let mut rng = restart_rng(cfg.seed, stream_base + r as u64);
            let mut w = init_weights(&mut rng, ev, cfg.init_range);
            let a = ascend(ev, &mut w, cfg.max_iters, cfg.step_rule, &mut scratch);
            let p = polish(ev, &mut w, 400, &mut scratch);
            (p.fidelity, w, a.iterations + p.iterations)
        })
        .collect();

    let mut best = 0;
    for r in 1..outcomes.len() {
        if outcomes[r].0 > outcomes[best].0 {
            best = r;
        }
    }
    let iterations = outcomes.iter().map(|o| o.2).sum();
    let (fidelity, weights, _) = outcomes.into_iter().nth(best).expect("restarts >= 1");
    RestartOutcome {
        weights,
        fidelity,
        iterations,
    }
}

/// Best-of-restarts weight optimization on a fixed topology. Deterministic
/// given the seed; returns the best weights found and their fidelity.
pub fn optimize_weights(
    topology: &Graph,
    target: &TargetSpec,
    cfg: &OptimizerConfig,
) -> Result<(Vec<f64>, f64), OptimizeError> {
    cfg.validate()?;
    let ev = PmEvaluator::new(topology, target)?;
    let out = run_restarts(&ev, cfg, cfg.restarts, 0);
    Ok((out.weights, out.fidelity))
}

/// Discovers a graph for `target`: starts from the complete colored graph
/// (minus forbidden pairs), optimizes weights, then repeatedly deletes the
/// smallest-|weight| edge whose removal keeps the re-optimized fidelity at or
/// above the prune threshold. Stops when no edge is removable and emits the
/// sparsest graph found.
pub fn discover(target: &TargetSpec, cfg: &OptimizerConfig) -> Result<DiscoveryResult, OptimizeError> {
    cfg.validate()?;
    let target = if cfg.ancillas > 0 {
        target.with_heralds(cfg.ancillas)
    } else {
        target.clone()
    };
    let dims = target.dimensions().to_vec();
    let full = complete_graph(dims.len(), &dims)?;
    let forbidden = |u: usize, v: usize| {
        cfg.fixed_vertices
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (b, a) == (u, v))
    };
    let start = full.filter_edges(|e| !forbidden(e.u(), e.v()));
    discover_from_topology(&start, &target, cfg)
}

/// Discovery restricted to a caller-supplied starting topology instead of
/// the complete graph. `target` is used as given; `cfg.ancillas` and
/// `cfg.fixed_vertices` are assumed to be baked into the inputs already.
pub fn discover_from_topology(
    start: &Graph,
    target: &TargetSpec,
    cfg: &OptimizerConfig,
) -> Result<DiscoveryResult, OptimizeError> {
    cfg.validate()?;
    let mut ev = PmEvaluator::new(start, target)?;
    let mut scratch = EvalScratch::default();

    let out = run_restarts(&ev, cfg, cfg.restarts, 0);
    let mut weights = out.weights;
    let mut current_f = out.fidelity;
    let mut iterations = out.iterations;
    let threshold = cfg.prune_threshold_fidelity;
    if current_f < threshold {
        return Err(OptimizeError::NoSolution {
            best_fidelity: current_f,
        });
    }

    // Topological loop: one smallest-|w| deletion per round. A removal is
    // kept only if the re-optimized fidelity stays above the threshold AND
    // does not erode what the denser graph achieved; without the second bar,
    // greedy pruning happily trades an exact solution for a sloppy one that
    // sits just above the threshold. Rescue restarts give the re-optimizer a
    // chance when the warm start is stuck in the old basin.
    const PRUNE_SLACK: f64 = 1e-7;
    let mut rescue_stream = 1 << 32;
    loop {
        let bar = threshold.max(current_f - PRUNE_SLACK);
        let mut order: Vec<usize> = ev.alive_edges().collect();
        order.sort_by(|&a, &b| {
            weights[a]
                .abs()
                .total_cmp(&weights[b].abs())
                .then(a.cmp(&b))
        });
        let mut removed = false;
        for e in order {
            ev.kill_edge(e);
            let saved = weights.clone();
            weights[e] = 0.0;
            let p = polish(&ev, &mut weights, 250, &mut scratch);
            iterations += p.iterations;
            let mut f_try = p.fidelity;
            if f_try < bar {
                for _ in 0..4 {
                    let mut rng = restart_rng(cfg.seed, rescue_stream);
                    rescue_stream += 1;
                    let mut w2 = init_weights(&mut rng, &ev, cfg.init_range);
                    let a = ascend(&ev, &mut w2, cfg.max_iters, cfg.step_rule, &mut scratch);
                    let p2 = polish(&ev, &mut w2, 400, &mut scratch);
                    iterations += a.iterations + p2.iterations;
                    if p2.fidelity > f_try {
                        f_try = p2.fidelity;
                        weights = w2;
                    }
                    if f_try >= bar {
                        break;
                    }
                }
            }
            if f_try >= bar {
                current_f = f_try;
                removed = true;
                break;
            }
            ev.revive_edge(e);
            weights = saved;
        }
        if !removed {
            break;
        }
    }

    let p = polish(&ev, &mut weights, 600, &mut scratch);
    iterations += p.iterations;
    current_f = p.fidelity;

    // First-order ascent stalls around 1 - 1e-13; a Gauss-Newton pass on the
    // amplitude residuals lands exactly on the solution manifold, which is
    // what makes later template extraction meet its 1e-9 residual gate.
    if let Some(refined) = newton::refine(&ev, &weights, current_f, &mut scratch) {
        weights = refined;
        current_f = ev.fidelity(&weights, &mut scratch);
    }

    if let Some(snapped) = snap::try_snap(start, &ev, &weights, current_f, &mut scratch) {
        weights = snapped;
    }

    // Zero-weight edges are dead; drop them from the emitted graph.
    for e in ev.alive_edges().collect::<Vec<_>>() {
        if weights[e] == 0.0 {
            ev.kill_edge(e);
        }
    }

    let kept: Vec<usize> = ev.alive_edges().collect();
    let graph = {
        let mut edges = Vec::with_capacity(kept.len());
        for &e in &kept {
            edges.push(start.edge(e).with_weight(weights[e]));
        }
        Graph::with_roles(
            start.dimensions().to_vec(),
            start.roles().to_vec(),
            edges,
        )?
    };
    let final_f = fidelity(&graph, target)?;
    Ok(DiscoveryResult {
        pm_count: ev.pm_count_alive(),
        graph,
        fidelity: final_f,
        iterations_used: iterations,
        seed_used: cfg.seed,
    })
}


/// Gaussian elimination with partial pivoting; good enough for the modest
/// dense systems in gauge fixing and Newton refinement.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))?;
        if a[pivot][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

mod newton {
    //! Gauss-Newton refinement onto the exact-solution manifold. The
    //! residuals are "every cross amplitude is zero" and "every target
    //! amplitude is proportional to its target coefficient"; both are
    //! multilinear in the weights, so a few Newton steps reach machine
    //! precision from any first-order-converged point.

    use super::{solve_dense, EvalScratch, PmEvaluator};

    pub fn refine(
        ev: &PmEvaluator,
        weights: &[f64],
        current_f: f64,
        scratch: &mut EvalScratch,
    ) -> Option<Vec<f64>> {
        if current_f < 0.999 {
            return None;
        }
        let coef = ev.target_coefficients().to_vec();
        if coef.iter().any(|c| c.im.abs() > 1e-12) {
            return None;
        }
        let coef: Vec<f64> = coef.iter().map(|c| c.re).collect();
        let reference = (0..coef.len()).max_by(|&a, &b| {
            coef[a].abs().total_cmp(&coef[b].abs())
        })?;
        if coef[reference] == 0.0 {
            return None;
        }

        let alive: Vec<usize> = ev.alive_edges().collect();
        let mut w = weights.to_vec();
        let mut jac: Vec<Vec<f64>> = Vec::new();
        let mut best_norm = f64::INFINITY;
        let mut best_w = w.clone();
        for _ in 0..12 {
            let amps = ev.amplitude_jacobian(&w, scratch, &mut jac);
            let scale = amps[reference].abs().max(1e-300);

            // Residual rows: one per non-reference term.
            let rows: Vec<usize> = (0..amps.len()).filter(|&k| k != reference).collect();
            let residual: Vec<f64> = rows
                .iter()
                .map(|&k| amps[k] * coef[reference] - amps[reference] * coef[k])
                .collect();
            let norm = residual.iter().fold(0.0f64, |a, &r| a.max(r.abs())) / scale;
            if norm < best_norm {
                best_norm = norm;
                best_w = w.clone();
            }
            if norm < 1e-15 {
                break;
            }

            // Normal equations on the alive-edge block.
            let n = alive.len();
            let mut ata = vec![vec![0.0f64; n]; n];
            let mut atb = vec![0.0f64; n];
            for (ri, &k) in rows.iter().enumerate() {
                let jrow: Vec<f64> = alive
                    .iter()
                    .map(|&e| coef[reference] * jac[k][e] - coef[k] * jac[reference][e])
                    .collect();
                for i in 0..n {
                    if jrow[i] == 0.0 {
                        continue;
                    }
                    for j in i..n {
                        ata[i][j] += jrow[i] * jrow[j];
                    }
                    atb[i] += jrow[i] * residual[ri];
                }
            }
            let ridge = 1e-12 * (1.0 + ata.iter().enumerate().map(|(i, r)| r[i]).sum::<f64>());
            for i in 0..n {
                for j in 0..i {
                    ata[i][j] = ata[j][i];
                }
                ata[i][i] += ridge;
            }
            let delta = solve_dense(ata, atb)?;
            for (i, &e) in alive.iter().enumerate() {
                w[e] -= delta[i];
            }
        }

        let f = ev.fidelity(&best_w, scratch);
        if f + 1e-12 >= current_f {
            Some(best_w)
        } else {
            None
        }
    }
}

mod snap {
    //! Weight beautification. Optimizer output sits on a gauge orbit
    //! (rescaling all edges at one vertex is invisible to the fidelity); fix
    //! the gauge by least squares, then round to a small dictionary of exact
    //! values. Accepted only if the fidelity does not drop.

    use super::{solve_dense, EvalScratch, PmEvaluator};
    use crate::graph::Graph;

    const DICTIONARY: &[f64] = &[
        0.0,
        0.25,
        1.0 / 3.0,
        0.5,
        0.57735026918962576, // 1/sqrt(3)
        0.70710678118654752, // 1/sqrt(2)
        2.0 / 3.0,
        0.75,
        0.86602540378443865, // sqrt(3)/2
        1.0,
        1.4142135623730951, // sqrt(2)
        1.7320508075688772, // sqrt(3)
        2.0,
    ];

    pub fn try_snap(
        g: &Graph,
        ev: &PmEvaluator,
        weights: &[f64],
        current_f: f64,
        scratch: &mut EvalScratch,
    ) -> Option<Vec<f64>> {
        let n = g.vertex_count();
        let alive: Vec<usize> = ev.alive_edges().collect();
        if alive.iter().any(|&e| weights[e].abs() < 1e-9) {
            return None;
        }

        // Unit-magnitude solutions are common enough that plain signs are
        // worth trying first; this also sidesteps flat directions of the
        // solution manifold that the vertex gauge cannot see.
        let mut signs = vec![0.0; weights.len()];
        for &e in &alive {
            signs[e] = 1.0f64.copysign(weights[e]);
        }
        if ev.fidelity(&signs, scratch) + 1e-12 >= current_f {
            return Some(signs);
        }

        // Least squares for per-vertex log scales x: minimize
        // sum_e (ln|w_e| - x_u - x_v)^2, ridge-regularized since the gauge
        // itself is only fixed up to graph symmetries.
        let mut a = vec![vec![0.0f64; n]; n];
        let mut b = vec![0.0f64; n];
        for &e in &alive {
            let (u, v) = (g.edge(e).u(), g.edge(e).v());
            let y = weights[e].abs().ln();
            a[u][u] += 1.0;
            a[v][v] += 1.0;
            a[u][v] += 1.0;
            a[v][u] += 1.0;
            b[u] += y;
            b[v] += y;
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-9;
        }
        let x = solve_dense(a, b)?;

        let mut snapped = vec![0.0; weights.len()];
        for &e in &alive {
            let (u, v) = (g.edge(e).u(), g.edge(e).v());
            let gauged = weights[e].abs() * (-x[u] - x[v]).exp();
            let nearest = DICTIONARY
                .iter()
                .copied()
                .min_by(|p, q| (p - gauged).abs().total_cmp(&(q - gauged).abs()))?;
            if (nearest - gauged).abs() > 0.08 * nearest.max(1.0) {
                return None;
            }
            snapped[e] = nearest.copysign(weights[e]);
        }

        let f = ev.fidelity(&snapped, scratch);
        if f + 1e-12 >= current_f {
            Some(snapped)
        } else {
            None
        }
    }
}
