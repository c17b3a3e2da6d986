//! Detection protocols with threshold rules, and the concentration
//! inequalities that certify them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{run_game, GameMode, GameTranscript, RoundSource};
use super::strategies::SyntheticOracle;
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Absolute slack applied to threshold comparisons.
pub const DECISION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionMode {
    /// Guess τ iff |S_n/n - p_τ| ≤ δ.
    CatalystThreshold,
    /// Guess τ iff S_n/n - p_LOCC ≥ δ.
    MemoryThreshold,
}

/// Which initial register state the referee is testing for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum World {
    Tau,
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub p_tau: f64,
    pub p_locc: f64,
    pub delta: f64,
    pub n: usize,
    pub mode: DetectionMode,
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        let probs_ok = (0.0..=1.0).contains(&self.p_tau) && (0.0..=1.0).contains(&self.p_locc);
        if !probs_ok || self.p_tau <= self.p_locc {
            return Err(Error::Spec(format!(
                "need 0 <= p_locc < p_tau <= 1, got p_tau={} p_locc={}",
                self.p_tau, self.p_locc
            )));
        }
        let gap = self.p_tau - self.p_locc;
        let hi = match self.mode {
            DetectionMode::CatalystThreshold => gap / 2.0,
            DetectionMode::MemoryThreshold => gap,
        };
        if !(self.delta > 0.0 && self.delta < hi) {
            return Err(Error::Spec(format!("delta must lie in (0, {hi}), got {}", self.delta)));
        }
        if self.n == 0 {
            return Err(Error::Spec("detection needs n >= 1 rounds".into()));
        }
        Ok(())
    }

    /// Threshold rule applied to the final score. Boundary cases are resolved
    /// with a slack of `DECISION_SLACK` so that, e.g., 85/100 - 0.75 ≥ 0.1.
    pub fn decide(&self, s_n: u64) -> World {
        let f = s_n as f64 / self.n as f64;
        let tau = match self.mode {
            DetectionMode::CatalystThreshold => (f - self.p_tau).abs() <= self.delta + DECISION_SLACK,
            DetectionMode::MemoryThreshold => f - self.p_locc >= self.delta - DECISION_SLACK,
        };
        if tau {
            World::Tau
        } else {
            World::Gamma
        }
    }

    /// i.i.d. success p_τ in world τ; success capped at p_LOCC, dropping by
    /// `penalty` after a failure, in world γ.
    pub fn default_oracles(&self, penalty: f64) -> (SyntheticOracle, SyntheticOracle) {
        (
            SyntheticOracle::Iid { p: self.p_tau },
            SyntheticOracle::HistoryCapped {
                p: self.p_locc,
                penalty: penalty.min(self.p_locc),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub guess: World,
    pub s_n: u64,
    pub transcript: GameTranscript,
}

/// One run of the detection protocol against `oracle`.
pub fn detect_catalyst(config: &DetectionConfig, oracle: &SyntheticOracle, seed: u64) -> Result<DetectionOutcome> {
    config.validate()?;
    let mut strategy = oracle.strategy()?;
    let transcript = run_game(strategy.as_mut(), &RoundSource::Synthetic, config.n, seed, GameMode::Memory)?;
    let s_n = transcript.s_n();
    Ok(DetectionOutcome {
        guess: config.decide(s_n),
        s_n,
        transcript,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionTrial {
    pub trial: usize,
    pub world: World,
    pub s_n: u64,
    pub guess: World,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub config: DetectionConfig,
    pub trials: usize,
    pub p_corr_tau: f64,
    pub p_corr_gamma: f64,
    /// ½[P_corr(τ) + P_corr(γ)].
    pub p_corr: f64,
    /// 1 - 2e^{-2nδ²}.
    pub hoeffding_target: f64,
    /// 1 - e^{-nδ²/2}.
    pub azuma_target: f64,
    pub records: Vec<DetectionTrial>,
}

/// `trials` runs in each world. Trial t of world w uses a seed derived from
/// (seed, w, t), so results do not depend on scheduling.
pub fn detection_trials(
    config: &DetectionConfig,
    tau: &SyntheticOracle,
    gamma: &SyntheticOracle,
    trials: usize,
    seed: u64,
) -> Result<DetectionSummary> {
    config.validate()?;
    if gamma.cap() > config.p_locc + 1e-12 {
        return Err(Error::Spec(format!(
            "world-gamma oracle success {} exceeds p_locc {}",
            gamma.cap(),
            config.p_locc
        )));
    }
    if trials == 0 {
        return Err(Error::Spec("need at least one trial".into()));
    }
    let streams = SeedStream::new(seed);
    let run_world = |world: World, oracle: &SyntheticOracle| -> Result<Vec<DetectionTrial>> {
        let label = match world {
            World::Tau => "trial-tau",
            World::Gamma => "trial-gamma",
        };
        (0..trials)
            .into_par_iter()
            .map(|t| {
                let out = detect_catalyst(config, oracle, streams.child(label, t as u64).root())?;
                Ok(DetectionTrial {
                    trial: t,
                    world,
                    s_n: out.s_n,
                    guess: out.guess,
                })
            })
            .collect()
    };
    let mut records = run_world(World::Tau, tau)?;
    records.extend(run_world(World::Gamma, gamma)?);
    let frac = |w: World| {
        records.iter().filter(|r| r.world == w && r.guess == w).count() as f64 / trials as f64
    };
    let (p_corr_tau, p_corr_gamma) = (frac(World::Tau), frac(World::Gamma));
    Ok(DetectionSummary {
        config: *config,
        trials,
        p_corr_tau,
        p_corr_gamma,
        p_corr: 0.5 * (p_corr_tau + p_corr_gamma),
        hoeffding_target: hoeffding_bound(config.n, config.delta),
        azuma_target: 1.0 - azuma_bound(config.n, config.delta),
        records,
    })
}

/// 1 - 2e^{-2nδ²}.
pub fn hoeffding_bound(n: usize, delta: f64) -> f64 {
    1.0 - 2.0 * (-2.0 * n as f64 * delta * delta).exp()
}

/// e^{-nδ²/2}.
pub fn azuma_bound(n: usize, delta: f64) -> f64 {
    (-(n as f64) * delta * delta / 2.0).exp()
}

/// Smallest integer n strictly above
/// max{(1/2δ²)(-ln(1/4 - T/8)), (2/δ²)(-ln(1/2 - T/4))}.
pub fn min_rounds(delta: f64, trace_distance: f64) -> Result<u64> {
    let t = trace_distance;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !(0.0..2.0).contains(&t) {
        return Err(Error::Domain(format!("trace distance must lie in [0, 2), got {t}")));
    }
    let (a1, a2) = (0.25 - t / 8.0, 0.5 - t / 4.0);
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::Domain("logarithm argument is not positive".into()));
    }
    let b1 = -a1.ln() / (2.0 * delta * delta);
    let b2 = -a2.ln() * 2.0 / (delta * delta);
    let m = b1.max(b2);
    Ok(m.floor() as u64 + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftBucket {
    /// X_{j-1}, or None for j = 1.
    pub previous: Option<u8>,
    pub j_start: usize,
    pub j_end: usize,
    pub count: usize,
    /// Mean of C_j - C_{j-1} = X_j - p_LOCC.
    pub mean_drift: f64,
    pub std_error: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupermartingaleReport {
    pub trajectories: usize,
    pub p_locc: f64,
    pub window: usize,
    pub buckets: Vec<DriftBucket>,
    pub pooled_drift: f64,
    pub pooled_std_error: f64,
    pub max_increment: f64,
    pub increments_ok: bool,
    pub drift_ok: bool,
}

impl SupermartingaleReport {
    pub fn ok(&self) -> bool {
        self.increments_ok && self.drift_ok
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn mean_se(&self) -> (f64, f64) {
        if self.n == 0 {
            return (0.0, 0.0);
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        if self.n < 2 {
            return (mean, f64::INFINITY);
        }
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// Streaming form of [`check_supermartingale`] for ensembles too large to
/// hold in memory.
#[derive(Debug, Clone)]
pub struct SupermartingaleCheck {
    p_locc: f64,
    window: usize,
    trajectories: usize,
    buckets: Vec<[Moments; 3]>,
    pooled: Moments,
    max_increment: f64,
}

impl SupermartingaleCheck {
    pub fn new(p_locc: f64, window: usize) -> Self {
        Self {
            p_locc,
            window: window.max(1),
            trajectories: 0,
            buckets: Vec::new(),
            pooled: Moments::default(),
            max_increment: f64::NEG_INFINITY,
        }
    }

    pub fn add_transcript(&mut self, t: &GameTranscript) -> Result<()> {
        t.check_invariants()?;
        let xs: Vec<u8> = t.outcomes().collect();
        self.add_outcomes(&xs)
    }

    /// Adds one trajectory given by its outcomes X_1..X_n.
    pub fn add_outcomes(&mut self, xs: &[u8]) -> Result<()> {
        let p = self.p_locc;
        let mut s_prev = 0u64;
        let mut prev: Option<u8> = None;
        for (i, &x) in xs.iter().enumerate() {
            if x > 1 {
                return Err(Error::Invariant(format!("outcome {x} is not a bit")));
            }
            let j = i + 1;
            let s = s_prev + u64::from(x);
            let c_inc = (s as f64 - j as f64 * p) - (s_prev as f64 - (j - 1) as f64 * p);
            self.max_increment = self.max_increment.max(c_inc);
            let w = i / self.window;
            if self.buckets.len() <= w {
                self.buckets.resize(w + 1, [Moments::default(); 3]);
            }
            let slot = match prev {
                None => 0,
                Some(0) => 1,
                Some(_) => 2,
            };
            let d = f64::from(x) - p;
            self.buckets[w][slot].push(d);
            self.pooled.push(d);
            prev = Some(x);
            s_prev = s;
        }
        self.trajectories += 1;
        Ok(())
    }

    pub fn report(&self) -> SupermartingaleReport {
        let n = self.buckets.len() * self.window;
        let mut out = Vec::new();
        for (w, row) in self.buckets.iter().enumerate() {
            for (slot, m) in row.iter().enumerate() {
                if m.n == 0 {
                    continue;
                }
                let (mean, se) = m.mean_se();
                out.push(DriftBucket {
                    previous: [None, Some(0), Some(1)][slot],
                    j_start: w * self.window + 1,
                    j_end: ((w + 1) * self.window).min(n),
                    count: m.n,
                    mean_drift: mean,
                    std_error: se,
                    ok: mean <= 3.0 * se,
                });
            }
        }
        let (pooled_drift, pooled_std_error) = self.pooled.mean_se();
        let drift_ok = out.iter().all(|b| b.ok) && pooled_drift <= 3.0 * pooled_std_error;
        SupermartingaleReport {
            trajectories: self.trajectories,
            p_locc: self.p_locc,
            window: self.window,
            buckets: out,
            pooled_drift,
            pooled_std_error,
            max_increment: self.max_increment,
            increments_ok: self.max_increment <= 1.0,
            drift_ok,
        }
    }
}

/// Checks that C_j = S_j - j·p_LOCC behaves as a supermartingale: the mean
/// increment, conditioned on X_{j-1} and on a window of `window` rounds, must
/// not exceed three standard errors, and every increment must be ≤ 1.
pub fn check_supermartingale(ensemble: &[GameTranscript], p_locc: f64, window: usize) -> Result<SupermartingaleReport> {
    let mut check = SupermartingaleCheck::new(p_locc, window);
    for t in ensemble {
        check.add_transcript(t)?;
    }
    Ok(check.report())
}
