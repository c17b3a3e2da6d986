//! Schmidt-type entanglement concentration of n copies of a pure state.
//!
//! Alice measures the type (occupation numbers of each Schmidt label) of her
//! n-fold Schmidt string. Outcome k occurs with probability
//! multinomial(n; k)·Π pᵢ^{kᵢ} and leaves a maximally entangled state of
//! dimension multinomial(n; k), tracked here only through its log₂.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;
use sha2::{Digest, Sha256};
use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::qmat::{CVector, PureState, TensorLayout};
use crate::rng::SeedStream;
use crate::states::SchmidtSpectrum;

/// Largest number of types enumerated in exact mode.
pub const MAX_EXACT_TYPES: f64 = 1e6;

/// Slack used when comparing log-gamma based log-dimensions to targets.
pub const LOG2_DIM_SLACK: f64 = 1e-9;

/// Two-sided 99% normal quantile used for Wilson intervals.
pub const Z_99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationOutcome {
    pub counts: Vec<usize>,
    /// log₂ of the multinomial coefficient n!/Π kᵢ!.
    pub log2_dim: f64,
    /// Exact probability, or empirical weight in sampling mode.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcentrationMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationDistribution {
    pub n: usize,
    pub exact: bool,
    pub samples: Option<usize>,
    pub outcomes: Vec<ConcentrationOutcome>,
}

impl ConcentrationDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// E[log₂ dim].
    pub fn mean_log2_dim(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.log2_dim).sum()
    }

    pub fn prob_at_least(&self, target: f64) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.log2_dim >= target - LOG2_DIM_SLACK)
            .map(|o| o.probability)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessEstimate {
    pub probability: f64,
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

pub fn log2_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let ln = ln_factorial(n as u64) - counts.iter().map(|&k| ln_factorial(k as u64)).sum::<f64>();
    (ln / std::f64::consts::LN_2).max(0.0)
}

/// Multinomial probability of `counts` under label probabilities `p`.
pub fn type_probability(counts: &[usize], p: &[f64]) -> f64 {
    let mut ln = log2_multinomial(counts) * std::f64::consts::LN_2;
    for (&k, &pi) in counts.iter().zip(p) {
        if k == 0 {
            continue;
        }
        if pi <= 0.0 {
            return 0.0;
        }
        ln += k as f64 * pi.ln();
    }
    ln.exp()
}

/// Number of types of length-n strings over `labels` symbols, C(n+labels-1, labels-1).
pub fn type_count(n: usize, labels: usize) -> f64 {
    let ln = ln_gamma((n + labels) as f64) - ln_gamma(n as f64 + 1.0) - ln_gamma(labels as f64);
    ln.exp()
}

fn for_each_composition(n: usize, parts: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(remaining: usize, idx: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if idx + 1 == buf.len() {
            buf[idx] = remaining;
            f(buf);
            return;
        }
        for k in (0..=remaining).rev() {
            buf[idx] = k;
            rec(remaining - k, idx + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(n, 0, &mut buf, f);
}

/// Draws a type vector: counts are multinomial(n, p), generated as a chain of
/// conditional binomials.
pub fn sample_type<R: Rng + ?Sized>(spectrum: &SchmidtSpectrum, n: usize, rng: &mut R) -> Vec<usize> {
    let p = spectrum.probabilities();
    let mut counts = vec![0; p.len()];
    let mut remaining = n as u64;
    let mut mass = 1.0f64;
    for (i, &pi) in p.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == p.len() {
            counts[i] = remaining as usize;
            break;
        }
        let q = if mass > 0.0 { (pi / mass).clamp(0.0, 1.0) } else { 0.0 };
        let k = Binomial::new(remaining, q).expect("q in [0,1]").sample(rng);
        counts[i] = k as usize;
        remaining -= k;
        mass -= pi;
    }
    counts
}

/// Outcome distribution of the type measurement on |ψ⟩^⊗n.
pub fn concentration_distribution(
    spectrum: &SchmidtSpectrum,
    n: usize,
    mode: ConcentrationMode,
) -> Result<ConcentrationDistribution> {
    if n == 0 {
        return Err(Error::Spec("concentration needs n >= 1 copies".into()));
    }
    let p = spectrum.probabilities();
    match mode {
        ConcentrationMode::Exact => {
            let types = type_count(n, p.len());
            if types > MAX_EXACT_TYPES {
                return Err(Error::Mode(format!(
                    "{types:.3e} types exceed the exact-enumeration limit of {MAX_EXACT_TYPES:.0e}; use sampling mode"
                )));
            }
            let mut outcomes = Vec::new();
            for_each_composition(n, p.len(), &mut |k| {
                let prob = type_probability(k, &p);
                if prob > 0.0 {
                    outcomes.push(ConcentrationOutcome {
                        counts: k.to_vec(),
                        log2_dim: log2_multinomial(k),
                        probability: prob,
                    });
                }
            });
            Ok(ConcentrationDistribution {
                n,
                exact: true,
                samples: None,
                outcomes,
            })
        }
        ConcentrationMode::Sampled { samples, seed } => {
            if samples == 0 {
                return Err(Error::Spec("sampling mode needs at least one sample".into()));
            }
            let mut rng = SeedStream::new(seed).rng("concentration", n as u64);
            let mut freq: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for _ in 0..samples {
                *freq.entry(sample_type(spectrum, n, &mut rng)).or_default() += 1;
            }
            let outcomes = freq
                .into_iter()
                .map(|(counts, c)| ConcentrationOutcome {
                    log2_dim: log2_multinomial(&counts),
                    probability: c as f64 / samples as f64,
                    counts,
                })
                .collect();
            Ok(ConcentrationDistribution {
                n,
                exact: false,
                samples: Some(samples),
                outcomes,
            })
        }
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// P_n = Pr[log₂ dim ≥ target]. Exact mode sums probabilities; sampling mode
/// reports a 99% Wilson interval.
pub fn concentration_success_prob(
    spectrum: &SchmidtSpectrum,
    n: usize,
    target_log2_dim: f64,
    mode: ConcentrationMode,
) -> Result<SuccessEstimate> {
    let dist = concentration_distribution(spectrum, n, mode)?;
    let p = dist.prob_at_least(target_log2_dim).clamp(0.0, 1.0);
    Ok(match dist.samples {
        None => SuccessEstimate {
            probability: p,
            lower: p,
            upper: p,
            exact: true,
        },
        Some(s) => {
            let hits = (p * s as f64).round() as usize;
            let (lower, upper) = wilson_interval(hits, s, Z_99);
            SuccessEstimate {
                probability: p,
                lower,
                upper,
                exact: false,
            }
        }
    })
}

/// Exact when the type count allows it, sampled otherwise.
pub fn auto_mode(spectrum: &SchmidtSpectrum, n: usize, samples: usize, seed: u64) -> ConcentrationMode {
    if type_count(n, spectrum.num_labels()) <= MAX_EXACT_TYPES {
        ConcentrationMode::Exact
    } else {
        ConcentrationMode::Sampled { samples, seed }
    }
}

/// Short stable identifier of a type vector.
pub fn counts_hash(counts: &[usize]) -> String {
    let mut h = Sha256::new();
    for &k in counts {
        h.update((k as u64).to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Explicit post-measurement state for outcome `counts` on n copies of the
/// Schmidt-form state Σᵢ √pᵢ |ii⟩, with its probability. Only for tiny n: the
/// vector has (labels^n)² entries.
pub fn concentrate_state_vector(spectrum: &SchmidtSpectrum, n: usize, counts: &[usize]) -> Result<(PureState, f64)> {
    let p = spectrum.probabilities();
    let d = p.len();
    if counts.len() != d || counts.iter().sum::<usize>() != n {
        return Err(Error::Spec("counts must have one entry per label and sum to n".into()));
    }
    let big = d.checked_pow(n as u32).filter(|&x| x <= 4096).ok_or_else(|| {
        Error::Mode("explicit state vectors are limited to labels^n <= 4096".into())
    })?;
    let layout = TensorLayout::from_pairs(&[("A", big), ("B", big)])?;
    let mut v = CVector::zeros(big * big);
    for s in 0..big {
        let mut digits = vec![0usize; n];
        let mut x = s;
        for slot in digits.iter_mut().rev() {
            *slot = x % d;
            x /= d;
        }
        let mut occ = vec![0usize; d];
        digits.iter().for_each(|&i| occ[i] += 1);
        if occ != counts {
            continue;
        }
        let amp: f64 = digits.iter().map(|&i| p[i].sqrt()).product();
        v[s * big + s] = Complex64::new(amp, 0.0);
    }
    let prob = v.norm_squared();
    if prob == 0.0 {
        return Err(Error::Spec("outcome has zero probability".into()));
    }
    Ok((PureState::normalized(layout, v)?, prob))
}
