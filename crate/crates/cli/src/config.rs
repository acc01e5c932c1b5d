//! Job configuration schema for the discover subcommand, plus the gate-spec
//! file format used by verify.

use anyhow::{bail, Result};
use serde::Deserialize;

use halo_core::graph::VertexRole;
use halo_core::optimize::OptimizerConfig;
use halo_core::target::{self, TargetSpec};
use halo_core::verify::GateSpec;
use halo_core::{Graph, Ket};

/// One discovery job: a target (named family or explicit kets), optimizer
/// settings, and optional role tags applied to the emitted graph.
#[derive(Deserialize)]
pub struct DiscoverJob {
    target: TargetConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    /// Role per vertex of the result ("detector" or "input"), for gates.
    #[serde(default)]
    roles: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetConfig {
    Ghz {
        particles: usize,
        dimension: usize,
        #[serde(default)]
        ancillas: usize,
    },
    Ame43 {},
    CnotChoi {
        control_dim: usize,
        target_dim: usize,
        #[serde(default)]
        ancillas: usize,
    },
    MaxEntangledPair {
        dimension: usize,
        #[serde(default)]
        ancillas: usize,
    },
    Kets {
        kets: Vec<String>,
        amplitudes: Vec<f64>,
        dimensions: Vec<usize>,
    },
}

impl DiscoverJob {
    pub fn parse(json: &str) -> Result<DiscoverJob> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn target(&self) -> Result<TargetSpec> {
        Ok(match &self.target {
            TargetConfig::Ghz {
                particles,
                dimension,
                ancillas,
            } => target::ghz_with_ancillas(*particles, *dimension, *ancillas)?,
            TargetConfig::Ame43 {} => target::ame43(),
            TargetConfig::CnotChoi {
                control_dim,
                target_dim,
                ancillas,
            } => target::cnot_choi(*control_dim, *target_dim, *ancillas)?,
            TargetConfig::MaxEntangledPair {
                dimension,
                ancillas,
            } => target::max_entangled_pair(*dimension, *ancillas)?,
            TargetConfig::Kets {
                kets,
                amplitudes,
                dimensions,
            } => target::parse_target(kets, amplitudes, dimensions)?,
        })
    }

    /// Retags vertex roles on a discovered graph, e.g. to mark gate inputs.
    pub fn apply_roles(&self, graph: &Graph) -> Result<Graph> {
        let Some(names) = &self.roles else {
            return Ok(graph.clone());
        };
        if names.len() != graph.vertex_count() {
            bail!(
                "config lists {} roles for a graph with {} vertices",
                names.len(),
                graph.vertex_count()
            );
        }
        let roles = names
            .iter()
            .map(|n| match n.as_str() {
                "detector" => Ok(VertexRole::Detector),
                "input" => Ok(VertexRole::Input),
                other => bail!("unknown role {other:?}"),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Graph::with_roles(
            graph.dimensions().to_vec(),
            roles,
            graph.edges().to_vec(),
        )?)
    }
}

#[derive(Deserialize)]
struct GateSpecDto {
    d1: usize,
    d2: usize,
    logical_inputs: (usize, usize),
    logical_outputs: (usize, usize),
    ancilla_outputs: Vec<usize>,
}

pub fn parse_gate_spec(json: &str) -> Result<GateSpec> {
    let dto: GateSpecDto = serde_json::from_str(json)?;
    Ok(GateSpec {
        d1: dto.d1,
        d2: dto.d2,
        logical_inputs: dto.logical_inputs,
        logical_outputs: dto.logical_outputs,
        ancilla_outputs: dto.ancilla_outputs,
    })
}

/// Digit-string helper shared by tests.
#[allow(dead_code)]
pub fn ket(s: &str) -> Ket {
    Ket::parse(s).expect("valid digits")
}
