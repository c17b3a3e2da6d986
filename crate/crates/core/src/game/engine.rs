//! Round loop, transcripts and the strategy interface.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distinguish::MeasurementChannel;
use crate::error::{Error, Result};
use crate::qmat::DensityOperator;
use crate::rng::{LabRng, SeedStream};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub j: usize,
    pub z: u8,
    pub y: u8,
    pub x: u8,
    pub memory: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameTranscript {
    pub protocol_id: String,
    pub seed: u64,
    pub n: usize,
    pub records: Vec<RoundRecord>,
    /// Cumulative successes, s[j-1] = S_j.
    pub s: Vec<u64>,
}

impl GameTranscript {
    pub fn s_n(&self) -> u64 {
        self.s.last().copied().unwrap_or(0)
    }

    /// S_j for 1 ≤ j ≤ n, and S_0 = 0.
    pub fn s_at(&self, j: usize) -> u64 {
        if j == 0 {
            0
        } else {
            self.s[j - 1]
        }
    }

    pub fn outcomes(&self) -> impl Iterator<Item = u8> + '_ {
        self.records.iter().map(|r| r.x)
    }

    /// X = 𝟙[Y = Z], S telescopes, increments in {0, 1}.
    pub fn check_invariants(&self) -> Result<()> {
        if self.records.len() != self.n || self.s.len() != self.n {
            return Err(Error::Invariant(format!(
                "transcript length mismatch: n={} records={} s={}",
                self.n,
                self.records.len(),
                self.s.len()
            )));
        }
        let mut acc = 0u64;
        for (i, r) in self.records.iter().enumerate() {
            if r.j != i + 1 || r.z > 1 || r.y > 1 || r.x != u8::from(r.y == r.z) {
                return Err(Error::Invariant(format!("bad record at round {}", i + 1)));
            }
            acc += u64::from(r.x);
            if self.s[i] != acc {
                return Err(Error::Invariant(format!("S does not telescope at round {}", i + 1)));
            }
        }
        Ok(())
    }
}

/// Where the prepared states come from.
#[derive(Debug, Clone)]
pub enum RoundSource {
    /// No states; strategies may only report success probabilities.
    Synthetic,
    /// ρ₀, ρ₁ as explicit density operators.
    States(Box<[DensityOperator; 2]>),
}

impl RoundSource {
    pub fn states(rho0: DensityOperator, rho1: DensityOperator) -> Self {
        RoundSource::States(Box::new([rho0, rho1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameMode {
    /// The memory may evolve freely.
    Memory,
    /// The memory descriptor must be identical before and after every round.
    Catalytic,
}

/// The round's prepared system, as seen by a strategy. Z stays private; the
/// strategy obtains its guess through one of the two backends.
pub struct Preparation<'a> {
    z: u8,
    source: &'a RoundSource,
    rng: &'a mut LabRng,
    guess: Option<u8>,
}

impl<'a> Preparation<'a> {
    fn commit(&mut self, y: u8) -> Result<u8> {
        if self.guess.is_some() {
            return Err(Error::Invariant("a round admits a single guess".into()));
        }
        self.guess = Some(y);
        Ok(y)
    }

    /// Probability-accounting backend: the guess is correct with probability
    /// `p`, which the strategy must have computed for the state it faces.
    pub fn guess_with_success(&mut self, p: f64) -> Result<u8> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Spec(format!("success probability {p} outside [0,1]")));
        }
        let correct = self.rng.gen::<f64>() < p;
        let y = if correct { self.z } else { 1 - self.z };
        self.commit(y)
    }

    /// Exact backend: `operation` acts on ρ_Z, then `channel` is measured.
    /// `decide` maps the outcome index to the guess.
    pub fn measure<F>(&mut self, operation: F, channel: &MeasurementChannel, decide: impl Fn(usize) -> u8) -> Result<u8>
    where
        F: FnOnce(&DensityOperator) -> Result<DensityOperator>,
    {
        let RoundSource::States(pair) = self.source else {
            return Err(Error::Mode("exact measurement requires explicit states".into()));
        };
        let rho = operation(&pair[self.z as usize])?;
        let k = channel.sample(&rho, self.rng)?;
        let y = decide(k);
        if y > 1 {
            return Err(Error::Invariant(format!("guess {y} is not a bit")));
        }
        self.commit(y)
    }
}

/// A player of the discrimination game.
pub trait Strategy: Send {
    fn protocol_id(&self) -> String;

    /// Strategy-owned summary of the memory register.
    fn memory_descriptor(&self) -> String;

    /// Plays round `j` (1-based). Must commit exactly one guess through `prep`.
    fn play(&mut self, j: usize, prep: &mut Preparation<'_>, rng: &mut LabRng) -> Result<()>;

    /// Referee's announcement of X_j after the guess.
    fn observe(&mut self, _j: usize, _x: u8) {}
}

/// Plays `n` rounds. Z, the measurement backend and the strategy each draw
/// from their own seed stream.
pub fn run_game(
    strategy: &mut dyn Strategy,
    source: &RoundSource,
    n: usize,
    seed: u64,
    mode: GameMode,
) -> Result<GameTranscript> {
    if n == 0 {
        return Err(Error::Spec("a game needs n >= 1 rounds".into()));
    }
    let streams = SeedStream::new(seed);
    let mut z_rng = streams.rng("z", 0);
    let mut m_rng = streams.rng("measure", 0);
    let mut s_rng = streams.rng("strategy", 0);
    let mut records = Vec::with_capacity(n);
    let mut s = Vec::with_capacity(n);
    let mut acc = 0u64;
    for j in 1..=n {
        let z: u8 = z_rng.gen_range(0..2);
        let before = strategy.memory_descriptor();
        let mut prep = Preparation {
            z,
            source,
            rng: &mut m_rng,
            guess: None,
        };
        strategy.play(j, &mut prep, &mut s_rng)?;
        let y = prep
            .guess
            .ok_or_else(|| Error::Invariant(format!("strategy made no guess in round {j}")))?;
        let memory = strategy.memory_descriptor();
        if mode == GameMode::Catalytic && memory != before {
            return Err(Error::CatalystViolation {
                round: j,
                before,
                after: memory,
            });
        }
        let x = u8::from(y == z);
        strategy.observe(j, x);
        acc += u64::from(x);
        s.push(acc);
        records.push(RoundRecord { j, z, y, x, memory });
    }
    Ok(GameTranscript {
        protocol_id: strategy.protocol_id(),
        seed,
        n,
        records,
        s,
    })
}
