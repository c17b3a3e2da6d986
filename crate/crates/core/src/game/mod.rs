//! Multi-round discrimination games, detection protocols and validators for
//! the concentration inequalities behind them.

mod detection;
mod engine;
mod rate;
mod strategies;

pub use detection::{
    azuma_bound, check_supermartingale, detect_catalyst, detection_trials, hoeffding_bound, min_rounds,
    DetectionConfig, DetectionMode, DetectionOutcome, DetectionSummary, DetectionTrial, DriftBucket, DECISION_SLACK,
    SupermartingaleCheck, SupermartingaleReport, World,
};
pub use engine::{run_game, GameMode, GameTranscript, Preparation, RoundRecord, RoundSource, Strategy};
pub use rate::{estimate_rate, run_trials, trial_seed, RateEstimate, StrategyFactory};
pub use strategies::{
    choose_block_length, memory_block_strategy, HistoryCappedOracle, MemoryBlockStrategy, OracleStrategy,
    SyntheticOracle, TeleportMeasureStrategy,
};

#[cfg(test)]
mod tests;
