//! Concrete strategies: synthetic oracles, the memory-block protocol and a
//! teleport-then-measure player on explicit states.

use serde::{Deserialize, Serialize};

use super::engine::{Preparation, Strategy};
use crate::distinguish::{helstrom, ChannelStructure, MeasurementChannel, PovmElement};
use crate::error::{spec_err, Error, Result};
use crate::protocols::{
    concentration_success_prob, log2_multinomial, sample_type, teleport, ConcentrationMode, SuccessEstimate,
    LOG2_DIM_SLACK,
};
use crate::qmat::{DensityOperator, PureState, TensorLayout};
use crate::rng::LabRng;
use crate::states::{check_psi_conditions, make_max_entangled, symmetric_projectors, PsiSpec, SchmidtSpectrum};

/// Succeeds independently with probability `p` in every round.
#[derive(Debug, Clone)]
pub struct OracleStrategy {
    p: f64,
    name: String,
}

impl OracleStrategy {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(spec_err(format!("oracle success {p} outside [0,1]")));
        }
        Ok(Self {
            p,
            name: format!("oracle(p={p})"),
        })
    }

    pub fn uniform() -> Self {
        Self {
            p: 0.5,
            name: "uniform-guess".into(),
        }
    }

    /// Per-round success equal to the Helstrom optimum of the pair.
    pub fn helstrom(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<Self> {
        let p = helstrom(rho0, rho1)?;
        Ok(Self {
            p,
            name: format!("helstrom-oracle(p={p})"),
        })
    }

    pub fn success(&self) -> f64 {
        self.p
    }
}

impl Strategy for OracleStrategy {
    fn protocol_id(&self) -> String {
        self.name.clone()
    }

    fn memory_descriptor(&self) -> String {
        String::new()
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, _rng: &mut LabRng) -> Result<()> {
        prep.guess_with_success(self.p).map(|_| ())
    }
}

/// Success `p` after a success (and in round 1), `p - penalty` after a
/// failure. Its conditional success never exceeds `p`.
#[derive(Debug, Clone)]
pub struct HistoryCappedOracle {
    p: f64,
    penalty: f64,
    last: Option<u8>,
}

impl HistoryCappedOracle {
    pub fn new(p: f64, penalty: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=p).contains(&penalty) {
            return Err(spec_err(format!("invalid capped oracle p={p} penalty={penalty}")));
        }
        Ok(Self {
            p,
            penalty,
            last: None,
        })
    }
}

impl Strategy for HistoryCappedOracle {
    fn protocol_id(&self) -> String {
        format!("capped-oracle(p={},penalty={})", self.p, self.penalty)
    }

    fn memory_descriptor(&self) -> String {
        String::new()
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, _rng: &mut LabRng) -> Result<()> {
        let p = if self.last == Some(0) { self.p - self.penalty } else { self.p };
        prep.guess_with_success(p).map(|_| ())
    }

    fn observe(&mut self, _j: usize, x: u8) {
        self.last = Some(x);
    }
}

/// Serializable description of a synthetic round oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", deny_unknown_fields)]
pub enum SyntheticOracle {
    Iid { p: f64 },
    HistoryCapped { p: f64, penalty: f64 },
}

impl SyntheticOracle {
    pub fn strategy(&self) -> Result<Box<dyn Strategy>> {
        Ok(match *self {
            SyntheticOracle::Iid { p } => Box::new(OracleStrategy::new(p)?),
            SyntheticOracle::HistoryCapped { p, penalty } => Box::new(HistoryCappedOracle::new(p, penalty)?),
        })
    }

    /// Largest conditional per-round success.
    pub fn cap(&self) -> f64 {
        match *self {
            SyntheticOracle::Iid { p } | SyntheticOracle::HistoryCapped { p, .. } => p,
        }
    }
}

/// Block protocol with reusable memory. Each block of `n_block` rounds starts
/// with a maximally entangled memory of log₂-dimension ≥ n_block·log₂ d₁
/// (a perfect one for the first block). Every round spends log₂ d₁ bits of it
/// to teleport A₁ and discriminate σ₀/σ₁ globally, and banks the round's copy
/// of ψ. At the end of a block the banked copies are concentrated; the
/// outcome's log-dimension is the next block's budget. Rounds without budget
/// are guessed.
#[derive(Debug, Clone)]
pub struct MemoryBlockStrategy {
    d1: usize,
    psi: PsiSpec,
    spectrum: SchmidtSpectrum,
    n_block: usize,
    block: usize,
    banked: usize,
    budget_rounds: usize,
    failed_blocks: usize,
}

pub fn memory_block_strategy(d1: usize, psi: PsiSpec, n_block: usize) -> Result<MemoryBlockStrategy> {
    let report = check_psi_conditions(&psi, d1, f64::INFINITY)?;
    if report.entropy_excess <= 0.0 {
        return Err(Error::Spec(format!(
            "entropy of psi ({:.6} bits) does not exceed log2 d1 = {:.6}",
            report.entropy,
            (d1 as f64).log2()
        )));
    }
    if n_block == 0 {
        return Err(spec_err("n_block must be >= 1"));
    }
    Ok(MemoryBlockStrategy {
        d1,
        psi,
        spectrum: psi.spectrum()?,
        n_block,
        block: 0,
        banked: 0,
        budget_rounds: n_block,
        failed_blocks: 0,
    })
}

impl MemoryBlockStrategy {
    pub fn n_block(&self) -> usize {
        self.n_block
    }

    pub fn failed_blocks(&self) -> usize {
        self.failed_blocks
    }

    /// n_block·log₂ d₁.
    pub fn target_bits(&self) -> f64 {
        self.n_block as f64 * (self.d1 as f64).log2()
    }

    /// ε̃ = 1 - Pr[concentration reaches the target] for this block length.
    pub fn failure_estimate(&self, mode: ConcentrationMode) -> Result<SuccessEstimate> {
        block_success(&self.spectrum, self.n_block, self.d1, mode)
    }

    fn refill(&mut self, rng: &mut LabRng) {
        let counts = sample_type(&self.spectrum, self.n_block, rng);
        let bits = log2_multinomial(&counts);
        let per_round = (self.d1 as f64).log2();
        let rounds = ((bits + LOG2_DIM_SLACK) / per_round).floor() as usize;
        if rounds < self.n_block {
            self.failed_blocks += 1;
        }
        self.budget_rounds = rounds.min(self.n_block);
        self.banked = 0;
        self.block += 1;
    }
}

fn block_success(spectrum: &SchmidtSpectrum, n: usize, d1: usize, mode: ConcentrationMode) -> Result<SuccessEstimate> {
    concentration_success_prob(spectrum, n, n as f64 * (d1 as f64).log2(), mode)
}

/// Smallest block length in `1..=max_n` whose concentration failure
/// probability is at most `eps`, together with its success estimate. In
/// sampling mode the lower confidence limit of the success is used.
pub fn choose_block_length(
    d1: usize,
    psi: &PsiSpec,
    eps: f64,
    max_n: usize,
    samples: usize,
    seed: u64,
) -> Result<(usize, SuccessEstimate)> {
    let spectrum = psi.spectrum()?;
    for n in 1..=max_n {
        let mode = crate::protocols::auto_mode(&spectrum, n, samples, seed);
        let est = block_success(&spectrum, n, d1, mode)?;
        if 1.0 - est.lower <= eps {
            return Ok((n, est));
        }
    }
    Err(Error::Spec(format!("no block length up to {max_n} reaches failure <= {eps}")))
}

impl Strategy for MemoryBlockStrategy {
    fn protocol_id(&self) -> String {
        format!(
            "memory-block(d1={},lambda={},d2={},n_block={})",
            self.d1, self.psi.lambda, self.psi.d2, self.n_block
        )
    }

    fn memory_descriptor(&self) -> String {
        format!("block={} banked={} budget={}", self.block, self.banked, self.budget_rounds)
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, rng: &mut LabRng) -> Result<()> {
        if self.budget_rounds > 0 {
            self.budget_rounds -= 1;
            prep.guess_with_success(1.0)?;
        } else {
            prep.guess_with_success(0.5)?;
        }
        self.banked += 1;
        if self.banked == self.n_block {
            self.refill(rng);
        }
        Ok(())
    }
}

/// Holds a stock of |φ_d⟩ pairs on A′B′. Each round teleports A₁ to Bob,
/// who then projects onto the symmetric/antisymmetric subspaces of B₁ and the
/// teleported factor. Runs on the exact backend with the σ pair.
#[derive(Debug, Clone)]
pub struct TeleportMeasureStrategy {
    d: usize,
    stock: Vec<PureState>,
    channel: MeasurementChannel,
}

impl TeleportMeasureStrategy {
    pub fn new(d: usize, pairs: usize) -> Result<Self> {
        let (p_sym, p_asym) = symmetric_projectors(d);
        let layout = TensorLayout::from_pairs(&[("B1", d), ("BT", d)])?;
        let channel = MeasurementChannel::new(
            layout,
            vec![PovmElement::new("sym", p_sym), PovmElement::new("asym", p_asym)],
            ChannelStructure::General,
        )?;
        let stock = (0..pairs).map(|_| make_max_entangled(d)).collect::<Result<_>>()?;
        Ok(Self { d, stock, channel })
    }

    pub fn remaining(&self) -> usize {
        self.stock.len()
    }
}

impl Strategy for TeleportMeasureStrategy {
    fn protocol_id(&self) -> String {
        format!("teleport-measure(d={})", self.d)
    }

    fn memory_descriptor(&self) -> String {
        format!("pairs={}", self.stock.len())
    }

    fn play(&mut self, _j: usize, prep: &mut Preparation<'_>, _rng: &mut LabRng) -> Result<()> {
        let resource = self
            .stock
            .pop()
            .ok_or_else(|| Error::Resource("no entangled pairs left in memory".into()))?;
        prep.measure(
            |rho| Ok(teleport(rho, "A1", resource, "BT")?.state),
            &self.channel,
            |k| k as u8,
        )?;
        Ok(())
    }
}
