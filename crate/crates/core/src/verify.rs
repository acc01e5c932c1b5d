//! Independent verification: checks state-creation graphs against target
//! states and gate graphs against their truth tables, input by input.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{Graph, VertexRole};
use crate::state::{pm_state, state_from_graph, Ket, StateVector};
use crate::target::TargetSpec;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("input vertex {vertex} has no mode assignment")]
    UnassignedInput { vertex: usize },
    #[error("assignment {mode} for input vertex {vertex} exceeds its dimension {dim}")]
    AssignmentOutOfRange {
        vertex: usize,
        mode: usize,
        dim: usize,
    },
    #[error("vertex {vertex} is not an input vertex")]
    NotAnInput { vertex: usize },
}

/// Truth table of a high-dimensional controlled shift: (m, n) maps to
/// (m, (n + m) mod d2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSpec {
    pub d1: usize,
    pub d2: usize,
    pub logical_inputs: (usize, usize),
    pub logical_outputs: (usize, usize),
    pub ancilla_outputs: Vec<usize>,
}

impl GateSpec {
    pub fn cnot(d1: usize, d2: usize, ancillas: usize) -> GateSpec {
        GateSpec {
            d1,
            d2,
            logical_inputs: (0, 1),
            logical_outputs: (2, 3),
            ancilla_outputs: (4..4 + ancillas).collect(),
        }
    }

    pub fn apply(&self, m: usize, n: usize) -> (usize, usize) {
        (m, (n + m) % self.d2)
    }

    pub fn basis_inputs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.d1).flat_map(move |m| (0..self.d2).map(move |n| (m, n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
}

/// A term that should not be there, or an expected term that is off.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Basis input for gate checks; absent for state checks.
    pub input: Option<(usize, usize)>,
    pub ket: Ket,
    pub observed: Complex64,
    pub expected: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub status: Status,
    /// Fidelity against the target; present for state verification.
    pub fidelity: Option<f64>,
    /// Residual cross-term mass (states) or worst relative residual (gates).
    pub residual: f64,
    /// Per-input success amplitude table for gate verification.
    pub amplitudes: Vec<((usize, usize), Complex64)>,
    /// Herald pattern shared by all surviving terms, for gate verification.
    pub herald: Option<Ket>,
    pub zero_state: bool,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn fail(zero_state: bool) -> Self {
        VerificationReport {
            status: Status::Fail,
            fidelity: None,
            residual: 1.0,
            amplitudes: Vec::new(),
            herald: None,
            zero_state,
            violations: Vec::new(),
        }
    }
}

/// PASS iff 1 - F(g, t) <= tol. Violations list the cross terms whose
/// normalized mass exceeds the tolerance.
pub fn verify_state(g: &Graph, t: &TargetSpec, tol: f64) -> Result<VerificationReport, VerifyError> {
    if g.dimensions() != t.dimensions() {
        return Err(VerifyError::ShapeMismatch(format!(
            "graph dimensions {:?} vs target dimensions {:?}",
            g.dimensions(),
            t.dimensions()
        )));
    }
    let raw = state_from_graph(g).map_err(|e| VerifyError::ShapeMismatch(e.to_string()))?;
    let Ok(psi) = raw.normalize() else {
        return Ok(VerificationReport::fail(true));
    };

    let overlap = t.to_state().inner(&psi);
    let fidelity = overlap.norm_sqr();
    let mut cross_mass = 0.0;
    let mut violations = Vec::new();
    for (ket, amp) in psi.terms() {
        if !t.contains(ket) {
            cross_mass += amp.norm_sqr();
            if amp.norm_sqr() > tol {
                violations.push(Violation {
                    input: None,
                    ket: ket.clone(),
                    observed: amp,
                    expected: Complex64::ZERO,
                });
            }
        }
    }
    let status = if 1.0 - fidelity <= tol {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(VerificationReport {
        status,
        fidelity: Some(fidelity),
        residual: cross_mass,
        amplitudes: Vec::new(),
        herald: None,
        zero_state: false,
        violations,
    })
}

/// Restriction of `g` to the edges compatible with the given input modes:
/// an edge at an input vertex survives iff its input-side mode matches the
/// assignment. Detector-detector edges are untouched and input vertices stay
/// in the graph — each incoming photon must still reach exactly one detector.
pub fn project_inputs(
    g: &Graph,
    assignment: &BTreeMap<usize, usize>,
) -> Result<Graph, VerifyError> {
    for (&v, &mode) in assignment {
        if v >= g.vertex_count() || g.role(v) != VertexRole::Input {
            return Err(VerifyError::NotAnInput { vertex: v });
        }
        if mode >= g.dimension(v) {
            return Err(VerifyError::AssignmentOutOfRange {
                vertex: v,
                mode,
                dim: g.dimension(v),
            });
        }
    }
    for v in g.input_vertices() {
        if !assignment.contains_key(&v) {
            return Err(VerifyError::UnassignedInput { vertex: v });
        }
    }
    Ok(g.filter_edges(|e| {
        for (v, mode) in [(e.u(), e.mode_u()), (e.v(), e.mode_v())] {
            if let Some(&assigned) = assignment.get(&v) {
                if mode != assigned {
                    return false;
                }
            }
        }
        true
    }))
}

/// State of a gate graph for one basis input, over its detector vertices.
pub fn projected_state(
    g: &Graph,
    assignment: &BTreeMap<usize, usize>,
) -> Result<StateVector, VerifyError> {
    Ok(pm_state(&project_inputs(g, assignment)?))
}

/// Verifies a gate graph against its truth table. For every basis input the
/// projected state must be c * |m, (n+m) mod d2> tensor a herald, with one
/// shared constant c — same modulus and phase, which is what coherent action
/// on superpositions requires — and one shared herald pattern. The herald is
/// discovered from the (0,0) input and then enforced globally. Residual terms
/// are measured relative to |c|.
pub fn verify_gate(g: &Graph, spec: &GateSpec, tol: f64) -> Result<VerificationReport, VerifyError> {
    let (in1, in2) = spec.logical_inputs;
    let (out1, out2) = spec.logical_outputs;
    for v in [in1, in2] {
        if v >= g.vertex_count() || g.role(v) != VertexRole::Input {
            return Err(VerifyError::ShapeMismatch(format!(
                "vertex {v} is not an input vertex"
            )));
        }
    }
    for &v in [out1, out2].iter().chain(&spec.ancilla_outputs) {
        if v >= g.vertex_count() || g.role(v) != VertexRole::Detector {
            return Err(VerifyError::ShapeMismatch(format!(
                "vertex {v} is not a detector vertex"
            )));
        }
    }
    if g.dimension(in1) != spec.d1 || g.dimension(out1) != spec.d1 {
        return Err(VerifyError::ShapeMismatch(
            "control dimensions do not match the gate".into(),
        ));
    }
    if g.dimension(in2) != spec.d2 || g.dimension(out2) != spec.d2 {
        return Err(VerifyError::ShapeMismatch(
            "target dimensions do not match the gate".into(),
        ));
    }
    let detector_count = g.detector_vertices().count();
    if spec.ancilla_outputs.len() + 2 != detector_count {
        return Err(VerifyError::ShapeMismatch(format!(
            "gate lists {} output vertices but the graph has {} detectors",
            spec.ancilla_outputs.len() + 2,
            detector_count
        )));
    }

    // Position of each named vertex inside the detector ket.
    let slot: BTreeMap<usize, usize> = g.detector_vertices().zip(0..).map(|(v, i)| (v, i)).collect();
    let out1_slot = slot[&out1];
    let out2_slot = slot[&out2];
    let anc_slots: Vec<usize> = spec.ancilla_outputs.iter().map(|v| slot[v]).collect();

    let mut herald: Option<Vec<u8>> = None;
    let mut reference: Option<Complex64> = None;
    let mut amplitudes = Vec::new();
    let mut violations = Vec::new();
    let mut worst_residual: f64 = 0.0;
    let mut zero_state = false;

    for (m, n) in spec.basis_inputs() {
        let assignment = BTreeMap::from([(in1, m), (in2, n)]);
        let state = projected_state(g, &assignment)?;
        if state.term_count() == 0 {
            zero_state = true;
            violations.push(Violation {
                input: Some((m, n)),
                ket: Ket(Vec::new()),
                observed: Complex64::ZERO,
                expected: Complex64::ONE,
            });
            continue;
        }
        if herald.is_none() {
            // Dominant term of the first input fixes the herald pattern.
            let dominant = state
                .terms()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .expect("nonempty state");
            herald = Some(anc_slots.iter().map(|&s| dominant.0.modes()[s]).collect());
        }
        let herald_modes = herald.as_ref().expect("set above");

        let (em, en) = spec.apply(m, n);
        let mut expected_modes = vec![0u8; detector_count];
        expected_modes[out1_slot] = em as u8;
        expected_modes[out2_slot] = en as u8;
        for (&s, &h) in anc_slots.iter().zip(herald_modes.iter()) {
            expected_modes[s] = h;
        }
        let expected_ket = Ket(expected_modes);

        let amp = state.amplitude(&expected_ket);
        let c = *reference.get_or_insert(amp);
        amplitudes.push(((m, n), amp));

        let scale = c.norm().max(f64::MIN_POSITIVE);
        if (amp - c).norm() > tol * scale {
            violations.push(Violation {
                input: Some((m, n)),
                ket: expected_ket.clone(),
                observed: amp,
                expected: c,
            });
        }
        let mut residual_sq = 0.0;
        for (ket, a) in state.terms() {
            if *ket != expected_ket {
                residual_sq += a.norm_sqr();
                if a.norm() > tol * scale {
                    violations.push(Violation {
                        input: Some((m, n)),
                        ket: ket.clone(),
                        observed: a,
                        expected: Complex64::ZERO,
                    });
                }
            }
        }
        worst_residual = worst_residual.max(residual_sq.sqrt() / scale);
    }

    let status = if violations.is_empty() && !zero_state {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(VerificationReport {
        status,
        fidelity: None,
        residual: worst_residual,
        amplitudes,
        herald: herald.map(Ket),
        zero_state,
        violations,
    })
}
