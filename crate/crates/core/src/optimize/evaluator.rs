//! Cached fidelity evaluation. The perfect-matching structure of a topology
//! does not depend on edge weights, so it is enumerated once; every fidelity
//! or gradient evaluation is then a pass over the cached matchings. Pruning
//! an edge only masks the matchings containing it.

use num_complex::Complex64;

use crate::graph::{enumerate_perfect_matchings, Graph, VertexRole};
use crate::state::Ket;
use crate::target::TargetSpec;

use super::OptimizeError;

/// Evaluates fidelity and its weight gradient against a fixed target over a
/// fixed topology, with support for masking (pruning) edges.
pub struct PmEvaluator {
    edge_count: usize,
    // CSR storage of matchings: member edge ids and the term each feeds.
    pm_edges: Vec<u32>,
    pm_offsets: Vec<u32>,
    pm_term: Vec<u32>,
    // Matchings touching each edge, for O(deg) masking updates.
    edge_pm_offsets: Vec<u32>,
    edge_pm_ids: Vec<u32>,
    terms: Vec<Ket>,
    // conj(target amplitude) per term; zero for cross terms.
    coef: Vec<Complex64>,
    alive: Vec<bool>,
    dead_members: Vec<u32>,
}

/// Reusable per-thread buffers for evaluation.
#[derive(Default, Clone)]
pub struct EvalScratch {
    amps: Vec<f64>,
    prefix: Vec<f64>,
    suffix: Vec<f64>,
}

impl PmEvaluator {
    pub fn new(graph: &Graph, target: &TargetSpec) -> Result<Self, OptimizeError> {
        if graph.roles().contains(&VertexRole::Input) {
            return Err(OptimizeError::ShapeMismatch(
                "discovery topologies must be all-detector".into(),
            ));
        }
        if graph.dimensions() != target.dimensions() {
            return Err(OptimizeError::ShapeMismatch(format!(
                "graph dimensions {:?} do not match target dimensions {:?}",
                graph.dimensions(),
                target.dimensions()
            )));
        }

        let pms = enumerate_perfect_matchings(graph);
        let mut terms: Vec<Ket> = Vec::new();
        let mut pm_edges = Vec::new();
        let mut pm_offsets = Vec::with_capacity(pms.len() + 1);
        let mut pm_term = Vec::with_capacity(pms.len());
        pm_offsets.push(0u32);

        for pm in &pms {
            let mut modes = vec![0u8; graph.vertex_count()];
            for e in pm.edges(graph) {
                modes[e.u()] = e.mode_u() as u8;
                modes[e.v()] = e.mode_v() as u8;
            }
            let ket = Ket(modes);
            let term = match terms.binary_search(&ket) {
                Ok(i) => i,
                Err(i) => {
                    terms.insert(i, ket);
                    // Re-point earlier matchings at the shifted term ids.
                    for t in pm_term.iter_mut() {
                        if *t >= i as u32 {
                            *t += 1;
                        }
                    }
                    i
                }
            };
            pm_term.push(term as u32);
            pm_edges.extend(pm.edge_indices().iter().map(|&e| e as u32));
            pm_offsets.push(pm_edges.len() as u32);
        }

        let coef = terms
            .iter()
            .map(|ket| target.amplitude(ket).conj())
            .collect();

        let edge_count = graph.edges().len();
        let mut deg = vec![0u32; edge_count];
        for &e in &pm_edges {
            deg[e as usize] += 1;
        }
        let mut edge_pm_offsets = vec![0u32; edge_count + 1];
        for i in 0..edge_count {
            edge_pm_offsets[i + 1] = edge_pm_offsets[i] + deg[i];
        }
        let mut cursor: Vec<u32> = edge_pm_offsets[..edge_count].to_vec();
        let mut edge_pm_ids = vec![0u32; pm_edges.len()];
        for pm in 0..pm_term.len() {
            for k in pm_offsets[pm]..pm_offsets[pm + 1] {
                let e = pm_edges[k as usize] as usize;
                edge_pm_ids[cursor[e] as usize] = pm as u32;
                cursor[e] += 1;
            }
        }

        Ok(PmEvaluator {
            edge_count,
            pm_edges,
            pm_offsets,
            pm_term,
            edge_pm_offsets,
            edge_pm_ids,
            terms,
            coef,
            alive: vec![true; edge_count],
            dead_members: vec![0; pms.len()],
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn pm_count(&self) -> usize {
        self.pm_term.len()
    }

    pub fn pm_count_alive(&self) -> usize {
        self.dead_members.iter().filter(|&&d| d == 0).count()
    }

    pub fn terms(&self) -> &[Ket] {
        &self.terms
    }

    pub fn is_alive(&self, edge: usize) -> bool {
        self.alive[edge]
    }

    pub fn alive_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edge_count).filter(|&e| self.alive[e])
    }

    pub fn kill_edge(&mut self, edge: usize) {
        assert!(self.alive[edge], "edge {edge} already dead");
        self.alive[edge] = false;
        let (lo, hi) = (
            self.edge_pm_offsets[edge] as usize,
            self.edge_pm_offsets[edge + 1] as usize,
        );
        for k in lo..hi {
            self.dead_members[self.edge_pm_ids[k] as usize] += 1;
        }
    }

    pub fn revive_edge(&mut self, edge: usize) {
        assert!(!self.alive[edge], "edge {edge} already alive");
        self.alive[edge] = true;
        let (lo, hi) = (
            self.edge_pm_offsets[edge] as usize,
            self.edge_pm_offsets[edge + 1] as usize,
        );
        for k in lo..hi {
            self.dead_members[self.edge_pm_ids[k] as usize] -= 1;
        }
    }

    fn pm_members(&self, pm: usize) -> &[u32] {
        let lo = self.pm_offsets[pm] as usize;
        let hi = self.pm_offsets[pm + 1] as usize;
        &self.pm_edges[lo..hi]
    }

    /// Unnormalized term amplitudes for the given weights, over live
    /// matchings only.
    pub fn term_amplitudes(&self, weights: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(weights.len(), self.edge_count);
        out.clear();
        out.resize(self.terms.len(), 0.0);
        for pm in 0..self.pm_term.len() {
            if self.dead_members[pm] != 0 {
                continue;
            }
            let mut prod = 1.0;
            for &e in self.pm_members(pm) {
                prod *= weights[e as usize];
            }
            out[self.pm_term[pm] as usize] += prod;
        }
    }

    /// F = |⟨t|ψ⟩|² / ⟨ψ|ψ⟩ with ψ the unnormalized matching state; zero for
    /// the zero state.
    pub fn fidelity(&self, weights: &[f64], scratch: &mut EvalScratch) -> f64 {
        self.term_amplitudes(weights, &mut scratch.amps);
        let mut c = Complex64::ZERO;
        let mut d = 0.0;
        for (k, &a) in scratch.amps.iter().enumerate() {
            c += self.coef[k] * a;
            d += a * a;
        }
        if d <= f64::MIN_POSITIVE {
            return 0.0;
        }
        c.norm_sqr() / d
    }

    /// Analytic gradient of the fidelity, exploiting multilinearity: the
    /// derivative of a term amplitude in one weight is the sum over its
    /// matchings containing that edge of the product of the other weights.
    /// Returns the fidelity.
    pub fn fidelity_grad(
        &self,
        weights: &[f64],
        scratch: &mut EvalScratch,
        grad: &mut [f64],
    ) -> f64 {
        debug_assert_eq!(grad.len(), self.edge_count);
        self.term_amplitudes(weights, &mut scratch.amps);
        let mut c = Complex64::ZERO;
        let mut d = 0.0;
        for (k, &a) in scratch.amps.iter().enumerate() {
            c += self.coef[k] * a;
            d += a * a;
        }
        if d <= f64::MIN_POSITIVE {
            grad.fill(0.0);
            return 0.0;
        }
        let n = c.norm_sqr();

        // dN/dw and dD/dw accumulated per edge in one pass over matchings.
        let mut dn = vec![0.0; self.edge_count];
        let mut dd = vec![0.0; self.edge_count];
        for pm in 0..self.pm_term.len() {
            if self.dead_members[pm] != 0 {
                continue;
            }
            let members = self.pm_members(pm);
            let m = members.len();
            scratch.prefix.clear();
            scratch.prefix.resize(m + 1, 1.0);
            scratch.suffix.clear();
            scratch.suffix.resize(m + 1, 1.0);
            for i in 0..m {
                scratch.prefix[i + 1] = scratch.prefix[i] * weights[members[i] as usize];
            }
            for i in (0..m).rev() {
                scratch.suffix[i] = scratch.suffix[i + 1] * weights[members[i] as usize];
            }
            let term = self.pm_term[pm] as usize;
            let coef = self.coef[term];
            let amp = scratch.amps[term];
            for (i, &e) in members.iter().enumerate() {
                let excl = scratch.prefix[i] * scratch.suffix[i + 1];
                let e = e as usize;
                // dN contribution: 2 Re(conj(c) · coef · excl)
                dn[e] += 2.0 * (c.re * (coef.re * excl) + c.im * (coef.im * excl));
                dd[e] += 2.0 * amp * excl;
            }
        }

        let inv_d2 = 1.0 / (d * d);
        for e in 0..self.edge_count {
            grad[e] = if self.alive[e] {
                (dn[e] * d - n * dd[e]) * inv_d2
            } else {
                0.0
            };
        }
        n / d
    }

    /// Target coefficients (conjugated target amplitudes) per term; zero for
    /// cross terms.
    pub fn target_coefficients(&self) -> &[Complex64] {
        &self.coef
    }

    /// Term amplitudes plus the full Jacobian dA_k/dw_e over live matchings.
    /// The Jacobian is dense, terms by edges.
    pub fn amplitude_jacobian(
        &self,
        weights: &[f64],
        scratch: &mut EvalScratch,
        jacobian: &mut Vec<Vec<f64>>,
    ) -> Vec<f64> {
        let mut amps = vec![0.0; self.terms.len()];
        jacobian.clear();
        jacobian.resize(self.terms.len(), Vec::new());
        for row in jacobian.iter_mut() {
            row.clear();
            row.resize(self.edge_count, 0.0);
        }
        for pm in 0..self.pm_term.len() {
            if self.dead_members[pm] != 0 {
                continue;
            }
            let members = self.pm_members(pm);
            let m = members.len();
            scratch.prefix.clear();
            scratch.prefix.resize(m + 1, 1.0);
            scratch.suffix.clear();
            scratch.suffix.resize(m + 1, 1.0);
            for i in 0..m {
                scratch.prefix[i + 1] = scratch.prefix[i] * weights[members[i] as usize];
            }
            for i in (0..m).rev() {
                scratch.suffix[i] = scratch.suffix[i + 1] * weights[members[i] as usize];
            }
            let term = self.pm_term[pm] as usize;
            amps[term] += scratch.prefix[m];
            for (i, &e) in members.iter().enumerate() {
                jacobian[term][e as usize] += scratch.prefix[i] * scratch.suffix[i + 1];
            }
        }
        amps
    }

    /// Live matchings with their term ket and whether the term is a target
    /// term: the raw material for classifying solutions.
    pub fn alive_pm_summary(&self) -> Vec<(Vec<usize>, Ket, bool)> {
        (0..self.pm_term.len())
            .filter(|&pm| self.dead_members[pm] == 0)
            .map(|pm| {
                let term = self.pm_term[pm] as usize;
                (
                    self.pm_members(pm).iter().map(|&e| e as usize).collect(),
                    self.terms[term].clone(),
                    self.coef[term] != Complex64::ZERO,
                )
            })
            .collect()
    }
}
