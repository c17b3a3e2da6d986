use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::layout::{Factor, TensorLayout};
use super::spectral;
use crate::error::{layout_err, Error, Result};
use crate::tolerance::Tolerances;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Square complex operator on a labeled tensor space. No positivity or trace
/// requirement; differences of states and partial transposes live here.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    layout: TensorLayout,
    matrix: CMatrix,
}

impl Operator {
    pub fn new(layout: TensorLayout, matrix: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(layout_err(format!(
                "matrix is {}x{} but layout has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn identity(layout: TensorLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            matrix: CMatrix::identity(d, d),
        }
    }

    pub fn from_real_diagonal(layout: TensorLayout, diag: &[f64]) -> Result<Self> {
        let v = CVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self::new(layout, CMatrix::from_diagonal(&v))
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entrywise |M - M†|.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// (M + M†)/2.
    pub fn hermitian_part(&self) -> Operator {
        Operator {
            layout: self.layout.clone(),
            matrix: spectral::hermitize(&self.matrix),
        }
    }

    fn same_layout(&self, other: &Operator) -> Result<()> {
        if self.layout != other.layout {
            return Err(layout_err(format!(
                "layouts differ: {:?} vs {:?}",
                self.layout.labels(),
                other.layout.labels()
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.same_layout(other)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_layout(other)?;
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator {
            layout: self.layout.clone(),
            matrix: &self.matrix * Complex64::new(s, 0.0),
        }
    }

    /// Re Tr[self · other].
    pub fn inner(&self, other: &Operator) -> Result<f64> {
        self.same_layout(other)?;
        Ok(spectral::trace_product(&self.matrix, &other.matrix).re)
    }

    /// Kronecker product; label sets must be disjoint.
    pub fn kron(&self, other: &Operator) -> Result<Operator> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Operator {
            layout,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Traces out the factors named in `drop`.
    pub fn partial_trace(&self, drop: &[&str]) -> Result<Operator> {
        let dropped = self.layout.mask(drop)?;
        let kept: Vec<bool> = dropped.iter().map(|d| !d).collect();
        if kept.iter().all(|k| !k) {
            return Err(layout_err("partial trace would drop every factor; use trace()"));
        }
        let layout = self.layout.restrict(&kept)?;
        let keep_off = self.layout.offsets(&kept);
        let drop_off = self.layout.offsets(&dropped);
        let n = keep_off.len();
        let mut out = CMatrix::zeros(n, n);
        for (r, &ro) in keep_off.iter().enumerate() {
            for (c, &co) in keep_off.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &drop_off {
                    acc += self.matrix[(ro + t, co + t)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(Operator { layout, matrix: out })
    }

    /// Transposes the factors named in `party`, leaving the rest untouched.
    pub fn partial_transpose(&self, party: &[&str]) -> Result<Operator> {
        let sel = self.layout.mask(party)?;
        let rest: Vec<bool> = sel.iter().map(|s| !s).collect();
        let p_off = self.layout.offsets(&sel);
        let q_off = self.layout.offsets(&rest);
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for &pi in &p_off {
            for &qi in &q_off {
                for &pj in &p_off {
                    for &qj in &q_off {
                        out[(pi + qi, pj + qj)] = self.matrix[(pj + qi, pi + qj)];
                    }
                }
            }
        }
        Ok(Operator {
            layout: self.layout.clone(),
            matrix: out,
        })
    }

    /// Reorders the factors; `order` must name every factor exactly once.
    pub fn permute(&self, order: &[&str]) -> Result<Operator> {
        let map = permutation_map(&self.layout, order)?;
        let layout = TensorLayout::new(
            order
                .iter()
                .map(|l| Factor::new(*l, self.layout.dim_of(l).unwrap_or(0)))
                .collect(),
        )?;
        let n = self.dim();
        let out = CMatrix::from_fn(n, n, |a, b| self.matrix[(map[a], map[b])]);
        Ok(Operator { layout, matrix: out })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<Operator> {
        Ok(Operator {
            layout: self.layout.relabel(from, to)?,
            matrix: self.matrix.clone(),
        })
    }
}

/// For each basis index of the permuted layout, the index it came from.
pub(crate) fn permutation_map(layout: &TensorLayout, order: &[&str]) -> Result<Vec<usize>> {
    if order.len() != layout.len() {
        return Err(layout_err(format!(
            "permutation names {} factors but layout has {}",
            order.len(),
            layout.len()
        )));
    }
    let old_strides = layout.strides();
    let mut positions = Vec::with_capacity(order.len());
    for l in order {
        let p = layout
            .position(l)
            .ok_or_else(|| layout_err(format!("unknown label {l:?}")))?;
        if positions.contains(&p) {
            return Err(layout_err(format!("label {l:?} repeated in permutation")));
        }
        positions.push(p);
    }
    let dims: Vec<usize> = positions.iter().map(|&p| layout.factors()[p].dim).collect();
    let mut map = vec![0usize];
    for (k, &p) in positions.iter().enumerate() {
        let mut next = Vec::with_capacity(map.len() * dims[k]);
        for &m in &map {
            for d in 0..dims[k] {
                next.push(m + d * old_strides[p]);
            }
        }
        map = next;
    }
    Ok(map)
}

/// Operator satisfying the density-operator invariants (Hermitian, PSD, unit
/// trace) at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    op: Operator,
}

impl DensityOperator {
    pub fn new(layout: TensorLayout, matrix: CMatrix) -> Result<Self> {
        Self::from_operator(Operator::new(layout, matrix)?)
    }

    pub fn from_operator(op: Operator) -> Result<Self> {
        Self::from_operator_with(op, &Tolerances::DEFAULT)
    }

    pub fn from_operator_with(op: Operator, tol: &Tolerances) -> Result<Self> {
        if !op.is_finite() {
            return Err(Error::Numeric("density operator has non-finite entries".into()));
        }
        let defect = op.hermitian_defect();
        if defect > tol.hermitian {
            return Err(Error::Invariant(format!(
                "operator is not Hermitian (defect {defect:.3e} > {:.0e})",
                tol.hermitian
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let min = spectral::min_eigenvalue(op.matrix());
        if min < -tol.psd {
            return Err(Error::Invariant(format!(
                "operator is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { op })
    }

    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(layout: TensorLayout) -> Self {
        let d = layout.dim();
        Self {
            op: Operator::identity(layout).scale(1.0 / d as f64),
        }
    }

    /// |i⟩⟨i| for a computational basis index.
    pub fn basis(layout: TensorLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(layout_err(format!("basis index {index} out of range for dim {d}")));
        }
        let mut m = CMatrix::zeros(d, d);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self {
            op: Operator::new(layout, m)?,
        })
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn layout(&self) -> &TensorLayout {
        self.op.layout()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        Ok(Self {
            op: self.op.kron(&other.op)?,
        })
    }

    pub fn partial_trace(&self, drop: &[&str]) -> Result<DensityOperator> {
        Ok(Self {
            op: self.op.partial_trace(drop)?.hermitian_part(),
        })
    }

    pub fn partial_transpose(&self, party: &[&str]) -> Result<Operator> {
        self.op.partial_transpose(party)
    }

    pub fn permute(&self, order: &[&str]) -> Result<DensityOperator> {
        Ok(Self {
            op: self.op.permute(order)?,
        })
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<DensityOperator> {
        Ok(Self {
            op: self.op.relabel(from, to)?,
        })
    }

    /// ρ - σ on a shared layout.
    pub fn difference(&self, other: &DensityOperator) -> Result<Operator> {
        self.op.sub(&other.op)
    }

    /// Convex combination Σ wᵢ ρᵢ; weights must be non-negative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
        let (first_w, first) = parts
            .first()
            .ok_or_else(|| Error::Spec("empty mixture".into()))?;
        let mut acc = first.op.scale(*first_w);
        for (w, rho) in &parts[1..] {
            acc = acc.add(&rho.op.scale(*w))?;
        }
        Self::from_operator(acc.hermitian_part())
    }

    pub fn purity(&self) -> f64 {
        spectral::trace_product(self.matrix(), self.matrix()).re
    }
}

/// Unit-norm state vector on a labeled space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    layout: TensorLayout,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(layout: TensorLayout, amplitudes: CVector) -> Result<Self> {
        Self::new_with(layout, amplitudes, &Tolerances::DEFAULT)
    }

    pub fn new_with(layout: TensorLayout, amplitudes: CVector, tol: &Tolerances) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(layout_err(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(Error::Numeric("non-finite amplitudes".into()));
        }
        if (norm - 1.0).abs() >= tol.pure_norm {
            return Err(Error::Invariant(format!("state norm {norm} is not 1")));
        }
        Ok(Self { layout, amplitudes })
    }

    /// Normalizes `amplitudes` before construction.
    pub fn normalized(layout: TensorLayout, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Numeric("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(layout, amplitudes.unscale(norm))
    }

    pub fn basis(layout: TensorLayout, index: usize) -> Result<Self> {
        let d = layout.dim();
        if index >= d {
            return Err(layout_err(format!("basis index {index} out of range for dim {d}")));
        }
        let mut v = CVector::zeros(d);
        v[index] = Complex64::new(1.0, 0.0);
        Self::new(layout, v)
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &PureState) -> Result<Complex64> {
        if self.layout != other.layout {
            return Err(layout_err("pure states live on different layouts"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator::from_operator_unchecked(
            Operator::new(self.layout.clone(), m).expect("dimension checked at construction"),
        )
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let layout = self.layout.concat(&other.layout)?;
        Ok(Self {
            layout,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn density_validation() {
        let l = TensorLayout::single("A", 2).unwrap();
        let bad_trace = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(1.0)]));
        assert!(matches!(
            DensityOperator::new(l.clone(), bad_trace),
            Err(Error::Invariant(_))
        ));
        let not_psd = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.5), c(-0.5)]));
        assert!(DensityOperator::new(l.clone(), not_psd).is_err());
        let mut nonherm = CMatrix::identity(2, 2) * c(0.5);
        nonherm[(0, 1)] = c(0.1);
        assert!(DensityOperator::new(l.clone(), nonherm).is_err());
        let mut nan = CMatrix::identity(2, 2) * c(0.5);
        nan[(0, 0)] = c(f64::NAN);
        assert!(matches!(DensityOperator::new(l, nan), Err(Error::Numeric(_))));
    }

    #[test]
    fn tensor_of_basis_states() {
        let a = DensityOperator::basis(TensorLayout::single("A", 2).unwrap(), 0).unwrap();
        let b = DensityOperator::basis(TensorLayout::single("B", 2).unwrap(), 1).unwrap();
        let ab = a.tensor(&b).unwrap();
        let expect = DensityOperator::basis(TensorLayout::from_pairs(&[("A", 2), ("B", 2)]).unwrap(), 1)
            .unwrap();
        assert_eq!(ab, expect);
        assert!(matches!(a.tensor(&a), Err(Error::Layout(_))));
    }

    #[test]
    fn permute_round_trip() {
        let l = TensorLayout::from_pairs(&[("A", 2), ("B", 3)]).unwrap();
        let m = CMatrix::from_fn(6, 6, |i, j| Complex64::new(i as f64, j as f64));
        let op = Operator::new(l, m).unwrap();
        let p = op.permute(&["B", "A"]).unwrap();
        assert_eq!(p.layout().labels(), vec!["B", "A"]);
        // |a b⟩ = index 3a + b becomes |b a⟩ = index 2b + a
        assert_eq!(p.matrix()[(2 * 1 + 1, 2 * 2)], op.matrix()[(3 + 1, 2)]);
        assert_eq!(p.permute(&["A", "B"]).unwrap(), op);
        assert!(op.permute(&["A"]).is_err());
        assert!(op.permute(&["A", "A"]).is_err());
    }

    #[test]
    fn unknown_labels_are_layout_errors() {
        let rho = DensityOperator::maximally_mixed(TensorLayout::from_pairs(&[("A", 2), ("B", 2)]).unwrap());
        assert!(matches!(rho.partial_trace(&["C"]), Err(Error::Layout(_))));
        assert!(matches!(rho.partial_transpose(&["C"]), Err(Error::Layout(_))));
        assert!(rho.partial_trace(&["A", "B"]).is_err());
    }

    #[test]
    fn pure_state_norm_checked() {
        let l = TensorLayout::single("A", 2).unwrap();
        assert!(PureState::new(l.clone(), CVector::from_vec(vec![c(1.0), c(1.0)])).is_err());
        let s = PureState::normalized(l, CVector::from_vec(vec![c(1.0), c(1.0)])).unwrap();
        assert!((s.amplitudes().norm() - 1.0).abs() < 1e-15);
    }
}
