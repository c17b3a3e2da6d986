//! Finite POVMs viewed as quantum-to-classical channels.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{min_eigenvalue, trace_product, CMatrix, DensityOperator, Operator, TensorLayout};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelStructure {
    /// Every element is A-part ⊗ B-part on a canonically ordered layout.
    ProductPovm,
    /// Rank-one projectors of one orthonormal basis.
    LocalBasis,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    pub label: String,
    pub operator: CMatrix,
    /// Local factors (Alice, Bob) when the element is a product.
    pub parts: Option<(CMatrix, CMatrix)>,
}

impl PovmElement {
    pub fn new(label: impl Into<String>, operator: CMatrix) -> Self {
        Self {
            label: label.into(),
            operator,
            parts: None,
        }
    }

    pub fn product(label: impl Into<String>, alice: CMatrix, bob: CMatrix) -> Self {
        Self {
            label: label.into(),
            operator: alice.kronecker(&bob),
            parts: Some((alice, bob)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementChannel {
    layout: TensorLayout,
    elements: Vec<PovmElement>,
    structure: ChannelStructure,
}

/// Signed outcome weights Tr[Mᵢ X] of a channel applied to a Hermitian X.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalOutput {
    pub values: Vec<f64>,
}

impl ClassicalOutput {
    /// Σᵢ |Tr[Mᵢ X]|, the trace norm of the channel output.
    pub fn measured_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

impl MeasurementChannel {
    pub fn new(layout: TensorLayout, elements: Vec<PovmElement>, structure: ChannelStructure) -> Result<Self> {
        Self::new_with(layout, elements, structure, &Tolerances::DEFAULT)
    }

    pub fn new_with(
        layout: TensorLayout,
        elements: Vec<PovmElement>,
        structure: ChannelStructure,
        tol: &Tolerances,
    ) -> Result<Self> {
        let d = layout.dim();
        if elements.is_empty() {
            return Err(Error::Channel("POVM has no elements".into()));
        }
        let mut sum = CMatrix::zeros(d, d);
        for e in &elements {
            if e.operator.nrows() != d || e.operator.ncols() != d {
                return Err(Error::Channel(format!(
                    "element {:?} has shape {}x{}, expected {d}x{d}",
                    e.label,
                    e.operator.nrows(),
                    e.operator.ncols()
                )));
            }
            let herm = (&e.operator - e.operator.adjoint()).camax();
            if herm > tol.povm {
                return Err(Error::Channel(format!("element {:?} is not Hermitian", e.label)));
            }
            let min = min_eigenvalue(&e.operator);
            if min < -tol.povm {
                return Err(Error::Channel(format!(
                    "element {:?} is not PSD (min eigenvalue {min:.3e})",
                    e.label
                )));
            }
            sum += &e.operator;
        }
        let defect = (sum - CMatrix::identity(d, d)).camax();
        if defect > tol.povm {
            return Err(Error::Channel(format!("elements sum to identity only within {defect:.3e}")));
        }
        if structure == ChannelStructure::ProductPovm {
            layout.bipartition()?;
            if layout.canonical_order()? != layout.labels() {
                return Err(Error::Channel("product POVM needs Alice's factors first".into()));
            }
            for e in &elements {
                let (a, b) = e
                    .parts
                    .as_ref()
                    .ok_or_else(|| Error::Channel(format!("element {:?} lacks product parts", e.label)))?;
                if a.nrows() * b.nrows() != d || (a.kronecker(b) - &e.operator).camax() > tol.povm {
                    return Err(Error::Channel(format!("element {:?} does not factor", e.label)));
                }
            }
        }
        Ok(Self {
            layout,
            elements,
            structure,
        })
    }

    /// Projective measurement in the computational basis of the whole layout.
    pub fn computational_basis(layout: TensorLayout) -> Result<Self> {
        let d = layout.dim();
        let elements = (0..d)
            .map(|i| {
                let mut m = CMatrix::zeros(d, d);
                m[(i, i)] = Complex64::new(1.0, 0.0);
                PovmElement::new(format!("{i}"), m)
            })
            .collect();
        Self::new(layout, elements, ChannelStructure::LocalBasis)
    }

    /// Two-outcome POVM {M, I - M}.
    pub fn binary(layout: TensorLayout, m: CMatrix) -> Result<Self> {
        let d = layout.dim();
        let rest = CMatrix::identity(d, d) - &m;
        Self::new(
            layout,
            vec![PovmElement::new("0", m), PovmElement::new("1", rest)],
            ChannelStructure::General,
        )
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn structure(&self) -> ChannelStructure {
        self.structure
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Replaces element `index` by `weights[k]·Mᵢ`, a coarse-graining inverse.
    /// Weights must be non-negative and sum to 1.
    pub fn refine(&self, index: usize, weights: &[f64]) -> Result<Self> {
        let e = self
            .elements
            .get(index)
            .ok_or_else(|| Error::Channel(format!("no element {index}")))?;
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Channel("refinement weights must form a distribution".into()));
        }
        let mut elements = self.elements.clone();
        let pieces: Vec<PovmElement> = weights
            .iter()
            .enumerate()
            .map(|(k, &w)| PovmElement {
                label: format!("{}.{k}", e.label),
                operator: &e.operator * Complex64::new(w, 0.0),
                parts: e
                    .parts
                    .as_ref()
                    .map(|(a, b)| (a * Complex64::new(w, 0.0), b.clone())),
            })
            .collect();
        elements.splice(index..=index, pieces);
        Self::new(self.layout.clone(), elements, self.structure)
    }

    fn check_layout(&self, op: &Operator) -> Result<()> {
        if op.layout() != &self.layout {
            return Err(Error::Channel(format!(
                "channel acts on {:?} but operator lives on {:?}",
                self.layout.labels(),
                op.layout().labels()
            )));
        }
        Ok(())
    }

    /// Outcome weights Tr[Mᵢ X].
    pub fn apply(&self, x: &Operator) -> Result<ClassicalOutput> {
        self.check_layout(x)?;
        Ok(ClassicalOutput {
            values: self
                .elements
                .iter()
                .map(|e| trace_product(&e.operator, x.matrix()).re)
                .collect(),
        })
    }

    /// Born-rule outcome distribution for a state.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        Ok(self
            .apply(rho.operator())?
            .values
            .into_iter()
            .map(|p| p.max(0.0))
            .collect())
    }

    /// Draws one outcome index.
    pub fn sample<R: Rng + ?Sized>(&self, rho: &DensityOperator, rng: &mut R) -> Result<usize> {
        let p = self.probabilities(rho)?;
        let total: f64 = p.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        for (i, &pi) in p.iter().enumerate() {
            if u < pi {
                return Ok(i);
            }
            u -= pi;
        }
        Ok(p.iter().rposition(|&x| x > 0.0).unwrap_or(0))
    }
}

/// Σᵢ |Tr[Mᵢ X]| for a channel applied to X.
pub fn apply_channel(channel: &MeasurementChannel, x: &Operator) -> Result<ClassicalOutput> {
    channel.apply(x)
}
