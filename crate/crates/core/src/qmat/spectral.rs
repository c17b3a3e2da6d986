//! Hermitian spectral kernels and the functionals built on them.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::operator::{CMatrix, DensityOperator, Operator};
use crate::error::{layout_err, Error, Result};
use crate::tolerance::Tolerances;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors matching `values`.
    pub vectors: CMatrix,
}

impl Eigh {
    /// V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let s = Complex64::new(f(v), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|x| x)
    }
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub fn eigh(m: &CMatrix) -> Eigh {
    let eig = SymmetricEigen::new(hermitize(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(hermitize(m)).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Tr[a b] without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Sum of the positive eigenvalues of a Hermitian matrix, i.e. the maximum of
/// Re Tr[M X] over 0 ⪯ M ⪯ I.
pub fn positive_part_trace(m: &CMatrix) -> f64 {
    eigenvalues(m).into_iter().filter(|&x| x > 0.0).sum()
}

/// Projector onto the eigenspaces with strictly positive eigenvalue.
pub fn positive_projector(m: &CMatrix) -> CMatrix {
    eigh(m).reconstruct_with(|x| if x > 0.0 { 1.0 } else { 0.0 })
}

/// Square root of a PSD matrix; small negative eigenvalues are clipped.
pub fn sqrt_psd(m: &CMatrix) -> CMatrix {
    eigh(m).reconstruct_with(|x| x.max(0.0).sqrt())
}

/// Trace norm ‖M‖₁. Hermitian input uses eigenvalues, anything else singular
/// values.
pub fn trace_norm(m: &Operator) -> Result<f64> {
    if !m.is_finite() {
        return Err(Error::Numeric("trace norm of non-finite operator".into()));
    }
    if m.is_hermitian(Tolerances::DEFAULT.hermitian) {
        Ok(eigenvalues(m.matrix()).iter().map(|x| x.abs()).sum())
    } else {
        Ok(m.matrix().clone().singular_values().iter().sum())
    }
}

/// Uhlmann fidelity (Tr√(√ρ σ √ρ))².
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.layout() != b.layout() {
        return Err(layout_err("fidelity of states on different layouts"));
    }
    let sa = sqrt_psd(a.matrix());
    let inner = &sa * b.matrix() * &sa;
    let root: f64 = eigenvalues(&inner).into_iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(m: &DensityOperator) -> f64 {
    let s: f64 = eigenvalues(m.matrix())
        .into_iter()
        .filter(|&x| x > 0.0)
        .map(|x| -x * x.log2())
        .sum();
    s.max(0.0)
}

/// Shannon entropy (bits) of a probability vector; 0·log 0 = 0.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}
