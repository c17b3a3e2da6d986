//! Constructors for the state families used throughout the crate.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{spec_err, Result};
use crate::qmat::{CMatrix, CVector, DensityOperator, Operator, PureState, TensorLayout};
use crate::rng::SeedStream;

/// Concrete hiding-pair families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HidingFamily {
    /// Normalized projectors onto the symmetric and antisymmetric subspaces of
    /// C^d ⊗ C^d.
    WernerProjectors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HidingPairSpec {
    pub family: HidingFamily,
    pub d: usize,
}

impl HidingPairSpec {
    pub fn werner(d: usize) -> Self {
        Self {
            family: HidingFamily::WernerProjectors,
            d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(spec_err(format!("hiding pair needs local dimension >= 2, got {}", self.d)));
        }
        Ok(())
    }
}

/// |ψ⟩ = √λ|00⟩ + √((1-λ)/(d₂-1)) Σ_{i≥1} |ii⟩ on A₂B₂.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    pub lambda: f64,
    pub d2: usize,
}

impl PsiSpec {
    pub fn new(lambda: f64, d2: usize) -> Result<Self> {
        let s = Self { lambda, d2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(spec_err(format!("lambda must lie in (0, 1), got {}", self.lambda)));
        }
        if self.d2 < 2 {
            return Err(spec_err(format!("d2 must be >= 2, got {}", self.d2)));
        }
        Ok(())
    }

    /// Squared Schmidt coefficient of every tail term.
    pub fn tail_probability(&self) -> f64 {
        (1.0 - self.lambda) / (self.d2 - 1) as f64
    }

    pub fn spectrum(&self) -> Result<SchmidtSpectrum> {
        self.validate()?;
        SchmidtSpectrum::new(vec![(self.lambda, 1), (self.tail_probability(), self.d2 - 1)])
    }

    /// Entanglement entropy -λ log₂λ - (1-λ) log₂[(1-λ)/(d₂-1)] in bits.
    pub fn entropy(&self) -> f64 {
        let l = self.lambda;
        -l * l.log2() - (1.0 - l) * self.tail_probability().log2()
    }
}

/// Schmidt probabilities with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    values: Vec<(f64, usize)>,
}

impl SchmidtSpectrum {
    pub fn new(values: Vec<(f64, usize)>) -> Result<Self> {
        if values.is_empty() {
            return Err(spec_err("empty Schmidt spectrum"));
        }
        let mut total = 0.0;
        for &(p, m) in &values {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(spec_err(format!("Schmidt probability {p} is not a non-negative number")));
            }
            if m == 0 {
                return Err(spec_err("Schmidt multiplicity must be positive"));
            }
            total += p * m as f64;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(spec_err(format!("Schmidt probabilities sum to {total}, not 1")));
        }
        Ok(Self { values })
    }

    /// Uniform spectrum of rank `l`.
    pub fn uniform(l: usize) -> Result<Self> {
        Self::new(vec![(1.0 / l.max(1) as f64, l)])
    }

    pub fn values(&self) -> &[(f64, usize)] {
        &self.values
    }

    /// One probability per Schmidt label, multiplicities expanded in order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.values
            .iter()
            .flat_map(|&(p, m)| std::iter::repeat(p).take(m))
            .collect()
    }

    pub fn num_labels(&self) -> usize {
        self.values.iter().map(|&(_, m)| m).sum()
    }

    /// Entropy of entanglement in bits.
    pub fn entropy(&self) -> f64 {
        self.values
            .iter()
            .filter(|&&(p, _)| p > 0.0)
            .map(|&(p, m)| -(m as f64) * p * p.log2())
            .sum()
    }
}

fn swap_operator(d: usize) -> CMatrix {
    let mut f = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            f[(i * d + j, j * d + i)] = Complex64::new(1.0, 0.0);
        }
    }
    f
}

/// (P_sym, P_asym) on C^d ⊗ C^d.
pub fn symmetric_projectors(d: usize) -> (CMatrix, CMatrix) {
    let id = CMatrix::identity(d * d, d * d);
    let f = swap_operator(d);
    let half = Complex64::new(0.5, 0.0);
    ((&id + &f) * half, (&id - &f) * half)
}

/// σ₀ = 2P_sym/(d(d+1)), σ₁ = 2P_asym/(d(d-1)) on factors A1, B1.
pub fn make_hiding_pair(spec: &HidingPairSpec) -> Result<(DensityOperator, DensityOperator)> {
    spec.validate()?;
    let d = spec.d;
    let layout = TensorLayout::from_pairs(&[("A1", d), ("B1", d)])?;
    match spec.family {
        HidingFamily::WernerProjectors => {
            let (ps, pa) = symmetric_projectors(d);
            let df = d as f64;
            let s0 = ps * Complex64::new(2.0 / (df * (df + 1.0)), 0.0);
            let s1 = pa * Complex64::new(2.0 / (df * (df - 1.0)), 0.0);
            Ok((
                DensityOperator::new(layout.clone(), s0)?,
                DensityOperator::new(layout, s1)?,
            ))
        }
    }
}

/// The near-product entangled state on A2, B2.
pub fn make_psi(spec: &PsiSpec) -> Result<PureState> {
    spec.validate()?;
    let d = spec.d2;
    let layout = TensorLayout::from_pairs(&[("A2", d), ("B2", d)])?;
    let mut v = CVector::zeros(d * d);
    v[0] = Complex64::new(spec.lambda.sqrt(), 0.0);
    let tail = spec.tail_probability().sqrt();
    for i in 1..d {
        v[i * d + i] = Complex64::new(tail, 0.0);
    }
    PureState::normalized(layout, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    /// 2√(1-λ) < ε′, which guarantees ‖ψ - |00⟩⟨00|‖₁ < ε′.
    pub near_product: bool,
    /// S(ψ^{A₂}) - log₂ d₁; positive means the memory protocol can refill.
    pub entropy_excess: f64,
    pub entropy: f64,
    pub distance_to_product: f64,
}

pub fn check_psi_conditions(spec: &PsiSpec, d1: usize, eps_prime: f64) -> Result<PsiReport> {
    spec.validate()?;
    if d1 < 2 {
        return Err(spec_err(format!("d1 must be >= 2, got {d1}")));
    }
    let distance = 2.0 * (1.0 - spec.lambda).sqrt();
    let entropy = spec.entropy();
    Ok(PsiReport {
        near_product: distance < eps_prime,
        entropy_excess: entropy - (d1 as f64).log2(),
        entropy,
        distance_to_product: distance,
    })
}

/// ρᵢ = σᵢ^{A1B1} ⊗ |ψ⟩⟨ψ|^{A2B2}.
pub fn make_rho_pair(hiding: &HidingPairSpec, psi: &PsiSpec) -> Result<(DensityOperator, DensityOperator)> {
    let (s0, s1) = make_hiding_pair(hiding)?;
    let p = make_psi(psi)?.density();
    Ok((s0.tensor(&p)?, s1.tensor(&p)?))
}

/// |φ_L⟩ = Σ|ii⟩/√L on factors `a_label`, `b_label`.
pub fn make_max_entangled_on(l: usize, a_label: &str, b_label: &str) -> Result<PureState> {
    if l < 1 {
        return Err(spec_err("maximally entangled state needs L >= 1"));
    }
    let layout = TensorLayout::from_pairs(&[(a_label, l), (b_label, l)])?;
    let mut v = CVector::zeros(l * l);
    let amp = Complex64::new(1.0 / (l as f64).sqrt(), 0.0);
    for i in 0..l {
        v[i * l + i] = amp;
    }
    PureState::normalized(layout, v)
}

/// |φ_L⟩ on the memory factors A', B'.
pub fn make_max_entangled(l: usize) -> Result<PureState> {
    make_max_entangled_on(l, "A'", "B'")
}

/// Haar-random unit vector.
pub fn haar_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-300 {
            return v.unscale(n);
        }
    }
}

/// Haar-random unitary (columns are an orthonormal basis), via QR of a
/// Ginibre matrix with phase correction.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Σₓ pₓ ψₓ ⊗ φₓ with Haar-random local pure states and flat-Dirichlet
/// weights. The layout must be bipartite (A/B label prefixes); factors keep
/// the order given in `layout`.
pub fn sample_separable(layout: &TensorLayout, k_terms: usize, seed: u64) -> Result<DensityOperator> {
    if k_terms == 0 {
        return Err(spec_err("separable sampler needs at least one term"));
    }
    let canonical = layout.canonical_order()?;
    let (alice, bob) = layout.bipartition()?;
    let da: usize = alice.iter().map(|l| layout.dim_of(l).unwrap_or(1)).product();
    let db: usize = bob.iter().map(|l| layout.dim_of(l).unwrap_or(1)).product();
    let mut rng = SeedStream::new(seed).rng("separable", 0);
    let mut weights: Vec<f64> = (0..k_terms).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let n = da * db;
    let mut m = CMatrix::zeros(n, n);
    for &w in &weights {
        let a = haar_vector(da, &mut rng);
        let b = haar_vector(db, &mut rng);
        let v = a.kronecker(&b);
        m += (&v * v.adjoint()) * Complex64::new(w, 0.0);
    }
    let canon_layout = TensorLayout::new(
        canonical
            .iter()
            .map(|l| crate::qmat::Factor::new(*l, layout.dim_of(l).unwrap_or(1)))
            .collect(),
    )?;
    let op = Operator::new(canon_layout, m)?.hermitian_part();
    let op = op.permute(&layout.labels())?;
    DensityOperator::from_operator(op)
}

/// Random full-rank mixed state from a Ginibre matrix G: ρ = GG†/Tr(GG†).
pub fn sample_ginibre<R: Rng + ?Sized>(layout: &TensorLayout, rng: &mut R) -> Result<DensityOperator> {
    let d = layout.dim();
    let g = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = Operator::new(layout.clone(), m.unscale(tr))?.hermitian_part();
    DensityOperator::from_operator(op)
}
