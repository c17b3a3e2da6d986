//! Empirical achievable-rate estimates over independent trials.

use rayon::prelude::*;
use serde::Serialize;

use super::engine::{run_game, GameMode, GameTranscript, RoundSource, Strategy};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Builds a fresh strategy for each trial.
pub type StrategyFactory<'a> = dyn Fn() -> Result<Box<dyn Strategy>> + Sync + 'a;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub r: f64,
    pub n_list: Vec<usize>,
    /// Pr(S_n ≥ r·n) over trials, one entry per checkpoint.
    pub success_frac: Vec<f64>,
    pub trials: usize,
}

/// Seed of trial `t` under root `seed`.
pub fn trial_seed(seed: u64, t: usize) -> u64 {
    SeedStream::new(seed).child("trial", t as u64).root()
}

/// Plays `trials` independent games of `n` rounds and hands each transcript
/// to `reduce` as soon as it finishes. Results come back in trial order.
pub fn run_trials<T: Send>(
    make: &StrategyFactory<'_>,
    source: &RoundSource,
    n: usize,
    trials: usize,
    seed: u64,
    mode: GameMode,
    reduce: impl Fn(usize, GameTranscript) -> T + Sync,
) -> Result<Vec<T>> {
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut strategy = make()?;
            let tr = run_game(strategy.as_mut(), source, n, trial_seed(seed, t), mode)?;
            Ok(reduce(t, tr))
        })
        .collect()
}

/// Pr(S_n ≥ r·n) at every checkpoint in `n_list`, from games of length
/// max(n_list). No interpolation between checkpoints.
pub fn estimate_rate(
    make: &StrategyFactory<'_>,
    source: &RoundSource,
    r: f64,
    trials: usize,
    n_list: &[usize],
    seed: u64,
) -> Result<RateEstimate> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Spec(format!("rate must lie in [0,1], got {r}")));
    }
    if trials == 0 || n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Spec("need trials >= 1 and positive checkpoints".into()));
    }
    let n_max = *n_list.iter().max().expect("non-empty");
    let hits = run_trials(make, source, n_max, trials, seed, GameMode::Memory, |_, tr| {
        n_list
            .iter()
            .map(|&n| tr.s_at(n) as f64 >= r * n as f64)
            .collect::<Vec<bool>>()
    })?;
    let success_frac = (0..n_list.len())
        .map(|k| hits.iter().filter(|h| h[k]).count() as f64 / trials as f64)
        .collect();
    Ok(RateEstimate {
        r,
        n_list: n_list.to_vec(),
        success_frac,
        trials,
    })
}
