//! Target states: GHZ families, the AME(4,3) state and arbitrary ket lists,
//! normalized at construction.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::state::{Ket, StateVector, AMPLITUDE_EPSILON};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TargetError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("ket {ket} does not fit the given lengths or dimensions")]
    ParseError { ket: String },
    #[error("duplicate ket {ket}")]
    DuplicateKet { ket: String },
    #[error("target state has zero norm")]
    ZeroNorm,
}

/// A normalized target state: kets with complex amplitudes plus the
/// per-particle mode counts. Kets are kept in canonical ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    kets: Vec<Ket>,
    amplitudes: Vec<Complex64>,
    dimensions: Vec<usize>,
}

impl TargetSpec {
    pub fn new(
        kets: Vec<Ket>,
        amplitudes: Vec<Complex64>,
        dimensions: Vec<usize>,
    ) -> Result<Self, TargetError> {
        if kets.len() != amplitudes.len() {
            return Err(TargetError::InvalidParam(format!(
                "{} kets but {} amplitudes",
                kets.len(),
                amplitudes.len()
            )));
        }
        if kets.is_empty() {
            return Err(TargetError::ZeroNorm);
        }
        for ket in &kets {
            if ket.len() != dimensions.len() {
                return Err(TargetError::ParseError {
                    ket: ket.to_string(),
                });
            }
            for (i, &m) in ket.modes().iter().enumerate() {
                if (m as usize) >= dimensions[i] {
                    return Err(TargetError::ParseError {
                        ket: ket.to_string(),
                    });
                }
            }
        }
        let mut sorted: BTreeMap<Ket, Complex64> = BTreeMap::new();
        for (ket, amp) in kets.into_iter().zip(amplitudes) {
            if sorted.insert(ket.clone(), amp).is_some() {
                return Err(TargetError::DuplicateKet {
                    ket: ket.to_string(),
                });
            }
        }
        let norm: f64 = sorted.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= AMPLITUDE_EPSILON {
            return Err(TargetError::ZeroNorm);
        }
        let (kets, amplitudes) = sorted
            .into_iter()
            .map(|(k, a)| (k, a / norm))
            .unzip();
        Ok(TargetSpec {
            kets,
            amplitudes,
            dimensions,
        })
    }

    pub fn kets(&self) -> &[Ket] {
        &self.kets
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dimensions(&self) -> &[usize] {
        &self.dimensions
    }

    pub fn particle_count(&self) -> usize {
        self.dimensions.len()
    }

    pub fn term_count(&self) -> usize {
        self.kets.len()
    }

    pub fn amplitude(&self, ket: &Ket) -> Complex64 {
        match self.kets.binary_search(ket) {
            Ok(i) => self.amplitudes[i],
            Err(_) => Complex64::ZERO,
        }
    }

    pub fn contains(&self, ket: &Ket) -> bool {
        self.kets.binary_search(ket).is_ok()
    }

    pub fn to_state(&self) -> StateVector {
        let terms = self
            .kets
            .iter()
            .cloned()
            .zip(self.amplitudes.iter().copied())
            .collect();
        StateVector::new(terms, true)
    }

    /// Product with `count` herald particles fixed in mode zero (dimension-1
    /// marker), appended after the existing particles.
    pub fn with_heralds(&self, count: usize) -> TargetSpec {
        let pad = Ket(vec![0u8; count]);
        let kets = self.kets.iter().map(|k| k.concat(&pad)).collect();
        let mut dimensions = self.dimensions.clone();
        dimensions.extend(std::iter::repeat(1).take(count));
        TargetSpec {
            kets,
            amplitudes: self.amplitudes.clone(),
            dimensions,
        }
    }
}

/// The n-particle, d-dimensional GHZ state: d kets |i⟩^⊗n with amplitude
/// 1/√d each.
pub fn ghz(n: usize, d: usize) -> Result<TargetSpec, TargetError> {
    if n < 2 {
        return Err(TargetError::InvalidParam(format!(
            "GHZ needs at least 2 particles, got {n}"
        )));
    }
    if d < 2 {
        return Err(TargetError::InvalidParam(format!(
            "GHZ needs dimension at least 2, got {d}"
        )));
    }
    if d > 10 {
        return Err(TargetError::InvalidParam(format!(
            "mode digits limit dimensions to 10, got {d}"
        )));
    }
    let kets = (0..d).map(|i| Ket(vec![i as u8; n])).collect();
    let amplitudes = vec![Complex64::new(1.0, 0.0); d];
    TargetSpec::new(kets, amplitudes, vec![d; n])
}

/// GHZ state in a product with `ancillas` herald particles fixed to |0⟩, the
/// form discovery targets take when ancillas are needed.
pub fn ghz_with_ancillas(n: usize, d: usize, ancillas: usize) -> Result<TargetSpec, TargetError> {
    Ok(ghz(n, d)?.with_heralds(ancillas))
}

/// The absolutely maximally entangled state of four three-dimensional
/// particles, in the standard two-index closed form
/// (1/3) Σ_{i,j} |i, j, i+j, i+2j⟩ with sums mod 3.
pub fn ame43() -> TargetSpec {
    let mut kets = Vec::with_capacity(9);
    for i in 0..3u8 {
        for j in 0..3u8 {
            kets.push(Ket(vec![i, j, (i + j) % 3, (i + 2 * j) % 3]));
        }
    }
    let amplitudes = vec![Complex64::new(1.0, 0.0); 9];
    TargetSpec::new(kets, amplitudes, vec![3; 4]).expect("closed form is valid")
}

/// Builds a normalized target from digit-string kets and real amplitudes.
pub fn parse_target(
    kets: &[impl AsRef<str>],
    amplitudes: &[f64],
    dimensions: &[usize],
) -> Result<TargetSpec, TargetError> {
    let parsed = kets
        .iter()
        .map(|s| {
            Ket::parse(s.as_ref()).ok_or_else(|| TargetError::ParseError {
                ket: s.as_ref().to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let amplitudes = amplitudes
        .iter()
        .map(|&a| Complex64::new(a, 0.0))
        .collect();
    TargetSpec::new(parsed, amplitudes, dimensions.to_vec())
}

/// Target for gate discovery: the post-selected state of a graph that acts as
/// CNOT(d1, d2) when its first two vertices are read as gate inputs. One term
/// |m, n, m, (n+m) mod d2⟩ per basis input, extended with `ancillas` heralds.
pub fn cnot_choi(d1: usize, d2: usize, ancillas: usize) -> Result<TargetSpec, TargetError> {
    if d1 < 2 || d2 < 2 || d1 > 10 || d2 > 10 {
        return Err(TargetError::InvalidParam(format!(
            "CNOT dimensions must be in 2..=10, got ({d1},{d2})"
        )));
    }
    let mut kets = Vec::with_capacity(d1 * d2);
    for m in 0..d1 {
        for n in 0..d2 {
            kets.push(Ket(vec![
                m as u8,
                n as u8,
                m as u8,
                ((n + m) % d2) as u8,
            ]));
        }
    }
    let amplitudes = vec![Complex64::new(1.0, 0.0); d1 * d2];
    Ok(TargetSpec::new(kets, amplitudes, vec![d1, d2, d1, d2])?.with_heralds(ancillas))
}

/// Maximally entangled two-particle target of the given dimension, extended
/// with heralds: the entanglement-swapping objective.
pub fn max_entangled_pair(d: usize, ancillas: usize) -> Result<TargetSpec, TargetError> {
    if d < 2 || d > 10 {
        return Err(TargetError::InvalidParam(format!(
            "dimension must be in 2..=10, got {d}"
        )));
    }
    let kets = (0..d).map(|i| Ket(vec![i as u8; 2])).collect();
    let amplitudes = vec![Complex64::new(1.0, 0.0); d];
    Ok(TargetSpec::new(kets, amplitudes, vec![d; 2])?.with_heralds(ancillas))
}
