//! Experiment configuration records. Every command can be described by one
//! `ExperimentConfig`, which is also what a run writes next to its outputs.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{DetectionMode, GameMode};
use crate::qmat::parse_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub params: CommandParams,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        parse_json(text)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandParams {
    Helstrom(StateParams),
    Bounds(BoundsParams),
    Entropy(EntropyParams),
    Construct(ConstructParams),
    Simulate(SimulateParams),
    Detect(DetectParams),
    Concentrate(ConcentrateParams),
    Rate(RateParams),
}

impl CommandParams {
    pub fn name(&self) -> &'static str {
        match self {
            CommandParams::Helstrom(_) => "helstrom",
            CommandParams::Bounds(_) => "bounds",
            CommandParams::Entropy(_) => "entropy",
            CommandParams::Construct(_) => "construct",
            CommandParams::Simulate(_) => "simulate",
            CommandParams::Detect(_) => "detect",
            CommandParams::Concentrate(_) => "concentrate",
            CommandParams::Rate(_) => "rate",
        }
    }
}

/// Where a state pair comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StateSource {
    Files { rho0: PathBuf, rho1: PathBuf },
    /// σ₀, σ₁ on A1, B1.
    Werner { d: usize },
    /// σᵢ ⊗ ψ on A1, B1, A2, B2.
    Rho { d: usize, lambda: f64, d2: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    pub states: StateSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsParams {
    pub states: StateSource,
    /// Number of Haar-random first-mover bases in the strategy library.
    #[serde(default = "default_bases")]
    pub random_bases: u32,
}

fn default_bases() -> u32 {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyParams {
    pub lambda: f64,
    pub d2: usize,
    #[serde(default = "default_d1")]
    pub d1: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_prime: Option<f64>,
}

fn default_d1() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructWhat {
    Pair,
    Psi,
    MaxEntangled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructParams {
    pub what: ConstructWhat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<StateSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d2: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProtocolSpec {
    Oracle {
        p: f64,
    },
    CappedOracle {
        p: f64,
        penalty: f64,
    },
    MemoryBlock {
        d1: usize,
        lambda: f64,
        d2: usize,
        /// Chosen as the shortest block with failure ≤ eps_target when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_block: Option<usize>,
        #[serde(default = "default_eps_target")]
        eps_target: f64,
    },
    /// Exact backend on the σ pair of dimension d.
    TeleportMeasure {
        d: usize,
    },
}

fn default_eps_target() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub protocol: ProtocolSpec,
    /// Rounds per trial. For memory-block, `blocks` may be given instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    pub trials: usize,
    #[serde(default = "default_mode")]
    pub mode: GameMode,
    /// Rate threshold for the summary's Pr(S_n ≥ r·n). Memory-block defaults
    /// to 1 - ε̃ - 0.05.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Only the first this-many trials are written to the transcript file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript_trials: Option<usize>,
}

fn default_mode() -> GameMode {
    GameMode::Memory
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectParams {
    pub p_tau: f64,
    pub p_locc: f64,
    pub delta: f64,
    /// Rounds; min_rounds(delta, trace_distance) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<f64>,
    #[serde(default = "default_detection_mode")]
    pub mode: DetectionMode,
    pub trials: usize,
    /// Drop in world-γ success after a failure.
    #[serde(default = "default_penalty")]
    pub penalty: f64,
}

fn default_detection_mode() -> DetectionMode {
    DetectionMode::CatalystThreshold
}

fn default_penalty() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnumerationMode {
    Exact,
    Sampled,
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrateParams {
    pub lambda: f64,
    pub d2: usize,
    pub n: usize,
    #[serde(default = "default_d1")]
    pub d1: usize,
    /// Target log₂-dimension; n·log₂ d1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default = "default_enum_mode")]
    pub mode: EnumerationMode,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_enum_mode() -> EnumerationMode {
    EnumerationMode::Auto
}

fn default_samples() -> usize {
    100_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    pub protocol: ProtocolSpec,
    pub r: f64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Checkpoints in blocks (memory-block only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks_list: Option<Vec<usize>>,
}
