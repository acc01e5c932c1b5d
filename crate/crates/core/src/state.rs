//! Sparse post-selected states: maps from mode-assignment kets to complex
//! amplitudes, computed by summing perfect-matching contributions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::graph::{enumerate_perfect_matchings, Graph, VertexRole};

/// Terms with |amplitude| at or below this are dropped after interference.
/// Far below any optimizer tolerance, so it only removes numerical zeros.
pub const AMPLITUDE_EPSILON: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("all amplitudes are below the pruning threshold")]
    ZeroState,
    #[error("graph has input-role vertices; project them before taking its state")]
    InputVerticesPresent,
}

/// A computational-basis ket: one mode index per detector vertex, in
/// ascending vertex order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ket(pub Vec<u8>);

impl Ket {
    pub fn modes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses a digit string such as "0123". Only dimensions up to 10 are
    /// representable in this form.
    pub fn parse(s: &str) -> Option<Ket> {
        s.chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<Vec<u8>>>()
            .map(Ket)
    }

    pub fn concat(&self, other: &Ket) -> Ket {
        let mut modes = self.0.clone();
        modes.extend_from_slice(&other.0);
        Ket(modes)
    }
}

impl fmt::Display for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &m in &self.0 {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

impl From<&[u8]> for Ket {
    fn from(modes: &[u8]) -> Self {
        Ket(modes.to_vec())
    }
}

/// Sparse state vector over detector kets. Amplitudes of graphs with real
/// edge weights are real, but the type carries complex amplitudes so targets
/// and states share arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    terms: BTreeMap<Ket, Complex64>,
    normalized: bool,
}

impl StateVector {
    pub fn new(terms: BTreeMap<Ket, Complex64>, normalized: bool) -> Self {
        StateVector { terms, normalized }
    }

    pub fn zero() -> Self {
        StateVector {
            terms: BTreeMap::new(),
            normalized: false,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Ket, Complex64)> {
        self.terms.iter().map(|(k, &a)| (k, a))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, ket: &Ket) -> Complex64 {
        self.terms.get(ket).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨self|other⟩ with `self` on the bra side.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.terms
            .iter()
            .map(|(k, a)| a.conj() * other.amplitude(k))
            .sum()
    }

    /// Unit 2-norm copy with relative phases preserved.
    pub fn normalize(&self) -> Result<StateVector, StateError> {
        let norm = self.norm_sqr().sqrt();
        if norm <= AMPLITUDE_EPSILON {
            return Err(StateError::ZeroState);
        }
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), a / norm))
            .collect();
        Ok(StateVector {
            terms,
            normalized: true,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        let terms = self
            .terms
            .iter()
            .map(|(k, a)| (k.clone(), a * factor))
            .collect();
        StateVector {
            terms,
            normalized: false,
        }
    }

    fn insert_pruned(terms: &mut BTreeMap<Ket, Complex64>, ket: Ket, amp: Complex64) {
        if amp.norm() > AMPLITUDE_EPSILON {
            terms.insert(ket, amp);
        }
    }
}

/// Post-selected state of `g`: one contribution per perfect matching, with
/// amplitude the product of member edge weights and the ket read off from the
/// mode each covering edge assigns to its detector endpoint. Contributions to
/// identical kets sum, which is where constructive and destructive
/// interference happens. The result is unnormalized.
pub fn state_from_graph(g: &Graph) -> Result<StateVector, StateError> {
    if g.roles().contains(&VertexRole::Input) {
        return Err(StateError::InputVerticesPresent);
    }
    Ok(pm_state(g))
}

/// Raw perfect-matching state over the detector vertices of `g`. Input
/// vertices are covered by matchings but excluded from the ket; callers from
/// gate verification must project input edges first.
pub(crate) fn pm_state(g: &Graph) -> StateVector {
    let detector_slot: Vec<Option<usize>> = {
        let mut slot = vec![None; g.vertex_count()];
        for (i, v) in g.detector_vertices().enumerate() {
            slot[v] = Some(i);
        }
        slot
    };
    let ket_len = detector_slot.iter().filter(|s| s.is_some()).count();

    let mut sums: BTreeMap<Ket, f64> = BTreeMap::new();
    for pm in enumerate_perfect_matchings(g) {
        let mut modes = vec![0u8; ket_len];
        let mut amp = 1.0;
        for e in pm.edges(g) {
            amp *= e.weight;
            if let Some(i) = detector_slot[e.u()] {
                modes[i] = e.mode_u() as u8;
            }
            if let Some(i) = detector_slot[e.v()] {
                modes[i] = e.mode_v() as u8;
            }
        }
        *sums.entry(Ket(modes)).or_insert(0.0) += amp;
    }

    let mut terms = BTreeMap::new();
    for (ket, amp) in sums {
        StateVector::insert_pruned(&mut terms, ket, Complex64::new(amp, 0.0));
    }
    StateVector {
        terms,
        normalized: false,
    }
}
