//! Teleportation and entanglement concentration.

mod concentration;
mod teleport;

pub use concentration::{
    auto_mode, concentrate_state_vector, concentration_distribution, concentration_success_prob, counts_hash,
    log2_multinomial, sample_type, type_count, type_probability, wilson_interval, ConcentrationDistribution,
    ConcentrationMode, ConcentrationOutcome, SuccessEstimate, LOG2_DIM_SLACK, MAX_EXACT_TYPES, Z_99,
};
pub use teleport::{teleport, Teleported};
