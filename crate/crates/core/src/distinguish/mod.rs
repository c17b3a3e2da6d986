//! Distinguishability functionals for pairs of bipartite states.

mod channel;
mod library;
mod sdp;

pub use channel::{apply_channel, ChannelStructure, ClassicalOutput, MeasurementChannel, PovmElement};
pub use library::{locc_lower_bound, BasisChoice, FirstMover, LowerBound, StrategyLibrary};
pub use sdp::{solve_ppt, PptOptions, PptSolution};

use serde::Serialize;

use crate::error::{spec_err, Error, Result};
use crate::qmat::{trace_norm, DensityOperator};

/// Optimal global success probability 1/2 + ‖ρ₀ - ρ₁‖₁/4 for equal priors.
pub fn helstrom(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<f64> {
    Ok(0.5 + trace_norm(&rho0.difference(rho1)?)? / 4.0)
}

/// PPT upper bound on the LOCC success probability.
#[derive(Debug, Clone, Serialize)]
pub struct PptBound {
    /// 1/2 + (certified upper bound on max Tr[MΔ])/2.
    pub value: f64,
    /// Success probability of the feasible PPT measurement found.
    pub achieved: f64,
    /// value - achieved.
    pub gap: f64,
    pub newton_steps: usize,
}

pub fn ppt_upper_bound(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<PptBound> {
    ppt_upper_bound_with(rho0, rho1, &PptOptions::default())
}

pub fn ppt_upper_bound_with(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    opts: &PptOptions,
) -> Result<PptBound> {
    let delta = rho0.difference(rho1)?;
    let (alice, _) = delta.layout().bipartition()?;
    let sol = match solve_ppt(&delta, &alice, opts) {
        Ok(s) => s,
        Err(Error::Solver {
            iterations,
            lower,
            upper,
        }) => {
            return Err(Error::Solver {
                iterations,
                lower: 0.5 + lower / 2.0,
                upper: 0.5 + upper / 2.0,
            })
        }
        Err(e) => return Err(e),
    };
    let value = (0.5 + sol.upper / 2.0).min(1.0);
    let achieved = 0.5 + sol.lower / 2.0;
    Ok(PptBound {
        value,
        achieved,
        gap: (value - achieved).max(0.0),
        newton_steps: sol.newton_steps,
    })
}

/// Upper bound ε + (1 + ε′)/2 on P_LOCC(ρ₀, ρ₁) for ρᵢ = σᵢ ⊗ ψ, given
/// P_LOCC(σ₀, σ₁) ≤ 1/2 + ε and ‖ψ - |00⟩⟨00|‖₁ ≤ ε′. Equivalently
/// 1/2 + (4ε + 2ε′)/4; computed in the first form.
pub fn thm2_locc_bound(eps: f64, eps_prime: f64) -> Result<f64> {
    if !(eps >= 0.0) || !(eps_prime >= 0.0) {
        return Err(spec_err(format!(
            "eps and eps_prime must be non-negative, got {eps} and {eps_prime}"
        )));
    }
    Ok(eps + (1.0 + eps_prime) / 2.0)
}

/// Helstrom value bracketed by an explicit one-way LOCC strategy and the PPT
/// relaxation.
#[derive(Debug, Clone)]
pub struct BoundBracket {
    pub helstrom: f64,
    pub locc_lower: f64,
    pub ppt_upper: f64,
    pub sdp_gap: f64,
    pub witness: MeasurementChannel,
    pub witness_id: String,
}

/// JSON shape emitted by the `bounds` command.
#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub helstrom: f64,
    pub locc_lower: f64,
    pub ppt_upper: f64,
    pub witness_id: String,
    pub sdp_gap: f64,
}

impl BoundBracket {
    pub fn compute(rho0: &DensityOperator, rho1: &DensityOperator, library: &StrategyLibrary) -> Result<Self> {
        let helstrom = helstrom(rho0, rho1)?;
        let lower = locc_lower_bound(rho0, rho1, library)?;
        let ppt = ppt_upper_bound(rho0, rho1)?;
        let bracket = Self {
            helstrom,
            locc_lower: lower.value,
            ppt_upper: ppt.value.min(helstrom),
            sdp_gap: ppt.gap,
            witness: lower.witness,
            witness_id: lower.witness_id,
        };
        bracket.check()?;
        Ok(bracket)
    }

    /// 1/2 ≤ locc_lower ≤ ppt_upper ≤ helstrom ≤ 1, up to solver tolerance.
    pub fn check(&self) -> Result<()> {
        let tol = 1e-6;
        let ok = self.locc_lower >= 0.5 - 1e-12
            && self.locc_lower <= self.ppt_upper + tol
            && self.ppt_upper <= self.helstrom + tol
            && self.helstrom <= 1.0 + 1e-9;
        if ok {
            Ok(())
        } else {
            Err(Error::Invariant(format!(
                "bracket out of order: lower {} ppt {} helstrom {}",
                self.locc_lower, self.ppt_upper, self.helstrom
            )))
        }
    }

    pub fn report(&self) -> BracketReport {
        BracketReport {
            helstrom: self.helstrom,
            locc_lower: self.locc_lower,
            ppt_upper: self.ppt_upper,
            witness_id: self.witness_id.clone(),
            sdp_gap: self.sdp_gap,
        }
    }
}
