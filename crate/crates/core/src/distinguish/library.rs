//! One-way LOCC strategy library for lower bounds on LOCC distinguishability.
//!
//! A strategy fixes which party measures first and an orthonormal basis for
//! that party. For outcome k the second party receives the conditional
//! operator X_k = (⟨b_k| ⊗ I) X (|b_k⟩ ⊗ I) and applies its optimal two-outcome
//! measurement, the projector onto the positive part of X_k. The resulting
//! product POVM is LOCC with one message and its measured norm is Σ_k ‖X_k‖₁.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::{ChannelStructure, MeasurementChannel, PovmElement};
use crate::error::{Error, Result};
use crate::qmat::{eigh, positive_projector, CMatrix, DensityOperator, Factor, Operator, TensorLayout};
use crate::rng::SeedStream;
use crate::states::haar_unitary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstMover {
    Alice,
    Bob,
}

/// How the first mover's basis is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Computational,
    Fourier,
    /// Eigenbasis of the first mover's marginal of ρ₀ - ρ₁.
    MarginalEigen,
    /// Eigenbasis of the first mover's marginal of ρ₀ + ρ₁.
    AverageEigen,
    Haar(u32),
}

/// Deterministically ordered list of one-way strategies. The guess-only
/// strategy (value 1/2) is always evaluated first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyLibrary {
    pub movers: Vec<FirstMover>,
    pub bases: Vec<BasisChoice>,
    pub seed: u64,
}

impl Default for StrategyLibrary {
    fn default() -> Self {
        Self::with_random_bases(8, 0)
    }
}

impl StrategyLibrary {
    pub fn with_random_bases(count: u32, seed: u64) -> Self {
        let mut bases = vec![
            BasisChoice::Computational,
            BasisChoice::Fourier,
            BasisChoice::MarginalEigen,
            BasisChoice::AverageEigen,
        ];
        bases.extend((0..count).map(BasisChoice::Haar));
        Self {
            movers: vec![FirstMover::Alice, FirstMover::Bob],
            bases,
            seed,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.movers.is_empty() || self.bases.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct LowerBound {
    /// 1/2 + measured_norm/4.
    pub value: f64,
    pub measured_norm: f64,
    pub witness: MeasurementChannel,
    pub witness_id: String,
}

pub(crate) fn strategy_id(mover: FirstMover, basis: BasisChoice) -> String {
    let m = match mover {
        FirstMover::Alice => "alice-first",
        FirstMover::Bob => "bob-first",
    };
    let b = match basis {
        BasisChoice::Computational => "computational".to_string(),
        BasisChoice::Fourier => "fourier".to_string(),
        BasisChoice::MarginalEigen => "marginal-eigen".to_string(),
        BasisChoice::AverageEigen => "average-eigen".to_string(),
        BasisChoice::Haar(k) => format!("haar-{k}"),
    };
    format!("{m}:{b}")
}

fn fourier(d: usize) -> CMatrix {
    let norm = 1.0 / (d as f64).sqrt();
    CMatrix::from_fn(d, d, |j, k| {
        Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * (j * k) as f64 / d as f64)
    })
}

/// Bipartite view of an operator: canonical order plus the dims of each side.
struct Bipartite {
    layout: TensorLayout,
    alice: Vec<String>,
    bob: Vec<String>,
    da: usize,
    db: usize,
}

impl Bipartite {
    fn of(layout: &TensorLayout) -> Result<Self> {
        let (alice, bob) = layout.bipartition()?;
        let order = layout.canonical_order()?;
        let canon = TensorLayout::new(
            order
                .iter()
                .map(|l| Factor::new(*l, layout.dim_of(l).unwrap_or(1)))
                .collect(),
        )?;
        let da = alice.iter().map(|l| layout.dim_of(l).unwrap_or(1)).product();
        let db = bob.iter().map(|l| layout.dim_of(l).unwrap_or(1)).product();
        Ok(Self {
            layout: canon,
            alice: alice.iter().map(|s| s.to_string()).collect(),
            bob: bob.iter().map(|s| s.to_string()).collect(),
            da,
            db,
        })
    }

    fn canonical(&self, op: &Operator) -> Result<Operator> {
        op.permute(&self.layout.labels())
    }
}

/// Conditional operator on the second mover for first-mover vector `v`.
fn conditional(x: &CMatrix, v: &[Complex64], mover: FirstMover, da: usize, db: usize) -> CMatrix {
    match mover {
        FirstMover::Alice => CMatrix::from_fn(db, db, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..da {
                let cp = v[p].conj();
                if cp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for q in 0..da {
                    acc += cp * x[(p * db + i, q * db + j)] * v[q];
                }
            }
            acc
        }),
        FirstMover::Bob => CMatrix::from_fn(da, da, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..db {
                let cp = v[p].conj();
                if cp == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for q in 0..db {
                    acc += cp * x[(i * db + p, j * db + q)] * v[q];
                }
            }
            acc
        }),
    }
}

fn first_mover_basis(
    basis: BasisChoice,
    mover: FirstMover,
    bip: &Bipartite,
    diff: &Operator,
    sum: &Operator,
    seeds: &SeedStream,
) -> Result<CMatrix> {
    let (dim, traced): (usize, Vec<&str>) = match mover {
        FirstMover::Alice => (bip.da, bip.bob.iter().map(|s| s.as_str()).collect()),
        FirstMover::Bob => (bip.db, bip.alice.iter().map(|s| s.as_str()).collect()),
    };
    Ok(match basis {
        BasisChoice::Computational => CMatrix::identity(dim, dim),
        BasisChoice::Fourier => fourier(dim),
        BasisChoice::MarginalEigen => eigh(diff.partial_trace(&traced)?.matrix()).vectors,
        BasisChoice::AverageEigen => eigh(sum.partial_trace(&traced)?.matrix()).vectors,
        BasisChoice::Haar(k) => {
            let label = match mover {
                FirstMover::Alice => "library-alice",
                FirstMover::Bob => "library-bob",
            };
            haar_unitary(dim, &mut seeds.rng(label, k as u64))
        }
    })
}

fn build_witness(
    bip: &Bipartite,
    x: &CMatrix,
    basis: &CMatrix,
    mover: FirstMover,
) -> Result<MeasurementChannel> {
    let n = basis.ncols();
    let mut elements = Vec::with_capacity(2 * n);
    for k in 0..n {
        let v: Vec<Complex64> = basis.column(k).iter().copied().collect();
        let proj = basis.column(k) * basis.column(k).adjoint();
        let xk = conditional(x, &v, mover, bip.da, bip.db);
        let plus = positive_projector(&xk);
        let minus = CMatrix::identity(plus.nrows(), plus.ncols()) - &plus;
        let (e_plus, e_minus) = match mover {
            FirstMover::Alice => (
                PovmElement::product(format!("{k}:0"), proj.clone(), plus),
                PovmElement::product(format!("{k}:1"), proj, minus),
            ),
            FirstMover::Bob => (
                PovmElement::product(format!("{k}:0"), plus, proj.clone()),
                PovmElement::product(format!("{k}:1"), minus, proj),
            ),
        };
        elements.push(e_plus);
        elements.push(e_minus);
    }
    MeasurementChannel::new(bip.layout.clone(), elements, ChannelStructure::ProductPovm)
}

/// Best one-way LOCC strategy in `library` for discriminating ρ₀ from ρ₁.
/// Ties keep the first strategy found in library order.
pub fn locc_lower_bound(
    rho0: &DensityOperator,
    rho1: &DensityOperator,
    library: &StrategyLibrary,
) -> Result<LowerBound> {
    if library.is_empty() {
        return Err(Error::Config("strategy library is empty".into()));
    }
    let bip = Bipartite::of(rho0.layout())?;
    let diff = bip.canonical(&rho0.difference(rho1)?)?;
    let sum = bip.canonical(&rho0.operator().add(rho1.operator())?)?;
    let seeds = SeedStream::new(library.seed);

    let guess = MeasurementChannel::new(
        bip.layout.clone(),
        vec![PovmElement::product(
            "guess",
            CMatrix::identity(bip.da, bip.da),
            CMatrix::identity(bip.db, bip.db),
        )],
        ChannelStructure::ProductPovm,
    )?;
    let mut best_norm = guess.apply(&diff)?.measured_norm();
    let mut best = (guess, "guess".to_string());

    for &mover in &library.movers {
        for &basis in &library.bases {
            let b = first_mover_basis(basis, mover, &bip, &diff, &sum, &seeds)?;
            let witness = build_witness(&bip, diff.matrix(), &b, mover)?;
            let norm = witness.apply(&diff)?.measured_norm();
            if norm > best_norm + 1e-12 {
                best_norm = norm;
                best = (witness, strategy_id(mover, basis));
            }
        }
    }
    Ok(LowerBound {
        value: 0.5 + best_norm / 4.0,
        measured_norm: best_norm,
        witness: best.0,
        witness_id: best.1,
    })
}
