//! Engine configuration with the shipped defaults.

use serde::{Deserialize, Serialize};

use crate::linker::LinkerConfig;
use crate::model::ModelDims;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EngineConfig {
    /// Beam width for relation extraction.
    pub beam_width: usize,
    /// Edge-probability threshold for structure decoding.
    pub threshold: f64,
    /// Cap on bindings enumerated per grounded endpoint during
    /// retrieval.
    pub binding_cap: usize,
    /// Seed for the deterministic feature provider and sampling.
    pub seed: u64,
    /// Scoring-model widths (used when running from a checkpoint).
    pub dims: ModelDims,
    /// Gumbel-softmax temperature.
    pub tau: f64,
    pub linker: LinkerConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            beam_width: 4,
            threshold: 0.5,
            binding_cap: 64,
            seed: 0,
            dims: ModelDims::default(),
            tau: 0.05,
            linker: LinkerConfig::default(),
        }
    }
}
