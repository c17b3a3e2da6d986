//! PPT relaxation of two-state discrimination, solved with a log-barrier
//! interior-point method.
//!
//! Problem: maximize Tr[M Δ] subject to 0 ⪯ M ⪯ I and 0 ⪯ M^Γ ⪯ I, where Δ is
//! ρ₀ - ρ₁ and Γ is the partial transpose on one party.
//!
//! Small Newton systems are formed densely in an orthonormal basis of
//! Hermitian matrices and solved by Cholesky; larger ones are solved
//! matrix-free with preconditioned conjugate gradients. Every reported bound is
//! certified independently of solver accuracy:
//! - upper: for any Hermitian W, Tr[MΔ] = Tr[M(Δ-W)] + Tr[M^Γ W^Γ] ≤
//!   pos(Δ-W) + pos(W^Γ), where pos is the sum of positive eigenvalues. W is
//!   taken from the barrier's dual estimate.
//! - lower: Tr[M'Δ] for a strictly feasible M' obtained by shrinking the
//!   iterate towards I/2 if needed.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{layout_err, Error, Result};
use crate::qmat::{CMatrix, Operator, TensorLayout};

/// Scalars the solver runs on. Real symmetric problems admit a real optimal
/// measurement (average M with its complex conjugate), so they are solved in
/// `f64` arithmetic.
pub trait Scalar: ComplexField<RealField = f64> + Copy {
    const COMPLEX: bool;
    fn from_complex(z: Complex64) -> Self;
    fn to_complex(self) -> Complex64;
}

impl Scalar for f64 {
    const COMPLEX: bool = false;
    fn from_complex(z: Complex64) -> Self {
        z.re
    }
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
}

impl Scalar for Complex64 {
    const COMPLEX: bool = true;
    fn from_complex(z: Complex64) -> Self {
        z
    }
    fn to_complex(self) -> Complex64 {
        self
    }
}

type Mat<T> = DMatrix<T>;

/// Largest number of real Hessian coordinates handled densely.
const DENSE_LIMIT: usize = 256;

fn hermitian_dim<T: Scalar>(n: usize) -> usize {
    if T::COMPLEX {
        n * n
    } else {
        n * (n + 1) / 2
    }
}

/// Orthonormal basis (Hilbert-Schmidt) of n×n Hermitian matrices over T.
fn hermitian_basis<T: Scalar>(n: usize) -> Vec<Mat<T>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(hermitian_dim::<T>(n));
    for i in 0..n {
        let mut e = Mat::<T>::zeros(n, n);
        e[(i, i)] = T::from_complex(Complex64::new(1.0, 0.0));
        out.push(e);
        for j in i + 1..n {
            let mut e = Mat::<T>::zeros(n, n);
            e[(i, j)] = T::from_complex(Complex64::new(r, 0.0));
            e[(j, i)] = T::from_complex(Complex64::new(r, 0.0));
            out.push(e);
            if T::COMPLEX {
                let mut e = Mat::<T>::zeros(n, n);
                e[(i, j)] = T::from_complex(Complex64::new(0.0, r));
                e[(j, i)] = T::from_complex(Complex64::new(0.0, -r));
                out.push(e);
            }
        }
    }
    out
}

/// Solves hess(x) = rhs by assembling the Hessian in `basis`.
fn dense_solve<T: Scalar>(hess: &impl Fn(&Mat<T>) -> Mat<T>, basis: &[Mat<T>], rhs: &Mat<T>) -> Option<Mat<T>> {
    let p = basis.len();
    let mut h = DMatrix::<f64>::zeros(p, p);
    for (l, bl) in basis.iter().enumerate() {
        let hb = hess(bl);
        for (k, bk) in basis.iter().enumerate().skip(l) {
            let v = inner(bk, &hb);
            h[(k, l)] = v;
            h[(l, k)] = v;
        }
    }
    let g = nalgebra::DVector::from_iterator(p, basis.iter().map(|b| inner(b, rhs)));
    let x = h.cholesky()?.solve(&g);
    let n = rhs.nrows();
    let mut out = Mat::<T>::zeros(n, n);
    for (b, &c) in basis.iter().zip(x.iter()) {
        out += b.scale(c);
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptOptions {
    /// Target (upper - lower) on Tr[MΔ].
    pub gap: f64,
    /// Largest gap accepted when the iteration can make no further progress
    /// (iteration budget spent or steps blocked by rounding near the
    /// boundary). Both bounds remain certified.
    pub stall_gap: f64,
    pub max_newton: usize,
    /// Barrier parameter growth per outer step.
    pub mu: f64,
    pub max_cg: usize,
}

impl Default for PptOptions {
    fn default() -> Self {
        Self {
            gap: 1e-7,
            stall_gap: 5e-5,
            max_newton: 400,
            mu: 8.0,
            max_cg: 400,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PptSolution {
    /// Certified upper bound on max Tr[MΔ].
    pub upper: f64,
    /// Tr[MΔ] for the returned feasible `measurement`.
    pub lower: f64,
    #[serde(skip)]
    pub measurement: CMatrix,
    pub newton_steps: usize,
    pub cg_steps: usize,
}

impl PptSolution {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Gather map for the partial transpose on column-major storage:
/// out[k] = in[src[k]].
struct PartialTranspose {
    src: Vec<usize>,
}

impl PartialTranspose {
    fn new(layout: &TensorLayout, party: &[&str]) -> Result<Self> {
        let n = layout.dim();
        let mut probe = CMatrix::zeros(n, n);
        for (k, z) in probe.iter_mut().enumerate() {
            *z = Complex64::new(k as f64, 0.0);
        }
        let pt = Operator::new(layout.clone(), probe)?.partial_transpose(party)?;
        let src = pt.matrix().iter().map(|z| z.re as usize).collect();
        Ok(Self { src })
    }

    fn apply<T: Scalar>(&self, m: &Mat<T>) -> Mat<T> {
        let n = m.nrows();
        let data = m.as_slice();
        Mat::from_iterator(n, n, self.src.iter().map(|&s| data[s]))
    }
}

fn inner<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conjugate() * *y).real()).sum()
}

fn herm<T: Scalar>(m: Mat<T>) -> Mat<T> {
    (&m + m.adjoint()).scale(0.5)
}

fn eigh<T: Scalar>(m: &Mat<T>) -> (Vec<f64>, Mat<T>) {
    let e = SymmetricEigen::new(herm(m.clone()));
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn eigenvalues<T: Scalar>(m: &Mat<T>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(herm(m.clone())).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Eigen-data of a box-constrained block 0 ≺ X ≺ I.
struct BoxBlock<T: Scalar> {
    vectors: Mat<T>,
    values: Vec<f64>,
}

impl<T: Scalar> BoxBlock<T> {
    fn new(x: &Mat<T>) -> Option<Self> {
        let (values, vectors) = eigh(x);
        if values.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return None;
        }
        Some(Self { vectors, values })
    }

    fn log_barrier(&self) -> f64 {
        -self.values.iter().map(|&v| v.ln() + (1.0 - v).ln()).sum::<f64>()
    }

    fn in_basis(&self, v: &Mat<T>) -> Mat<T> {
        self.vectors.adjoint() * v * &self.vectors
    }

    fn from_basis(&self, v: &Mat<T>) -> Mat<T> {
        &self.vectors * v * self.vectors.adjoint()
    }

    fn diag_fn(&self, f: impl Fn(f64) -> f64) -> Mat<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            scaled.column_mut(j).scale_mut(s);
        }
        scaled * self.vectors.adjoint()
    }

    /// Gradient of -log det X - log det (I - X).
    fn gradient(&self) -> Mat<T> {
        self.diag_fn(|v| -1.0 / v + 1.0 / (1.0 - v))
    }

    /// Hessian weights in the eigenbasis.
    fn weights(&self) -> DMatrix<f64> {
        let n = self.values.len();
        DMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (self.values[i], self.values[j]);
            1.0 / (a * b) + 1.0 / ((1.0 - a) * (1.0 - b))
        })
    }
}

fn hadamard<T: Scalar>(a: &Mat<T>, w: &DMatrix<f64>) -> Mat<T> {
    a.zip_map(w, |x, y| x.scale(y))
}

fn hadamard_div<T: Scalar>(a: &Mat<T>, w: &DMatrix<f64>) -> Mat<T> {
    a.zip_map(w, |x, y| x.unscale(y))
}

struct Point<T: Scalar> {
    m: Mat<T>,
    primal: BoxBlock<T>,
    dual: BoxBlock<T>,
}

impl<T: Scalar> Point<T> {
    fn new(m: Mat<T>, pt: &PartialTranspose) -> Option<Self> {
        let primal = BoxBlock::new(&m)?;
        let dual = BoxBlock::new(&herm(pt.apply(&m)))?;
        Some(Self { m, primal, dual })
    }

    fn barrier(&self) -> f64 {
        self.primal.log_barrier() + self.dual.log_barrier()
    }
}

fn sum_positive<T: Scalar>(m: &Mat<T>) -> f64 {
    eigenvalues(m).into_iter().filter(|&x| x > 0.0).sum()
}

/// Certified upper bound from the dual estimate at barrier parameter `t`.
fn certificate<T: Scalar>(point: &Point<T>, t: f64, delta: &Mat<T>, pt: &PartialTranspose) -> f64 {
    // W^Γ = (I - N)^{-1}/t - N^{-1}/t
    let w_gamma = point.dual.diag_fn(|v| (1.0 / (1.0 - v) - 1.0 / v) / t);
    let w = herm(pt.apply(&w_gamma));
    sum_positive(&(delta - &w)) + sum_positive(&w_gamma)
}

/// Shrinks `m` towards I/2 until both box constraints hold exactly.
fn feasible_value<T: Scalar>(m: &Mat<T>, delta: &Mat<T>, pt: &PartialTranspose) -> (f64, Mat<T>) {
    let ev = eigenvalues(m);
    let evg = eigenvalues(&herm(pt.apply(m)));
    let excess = [
        -ev.first().copied().unwrap_or(0.0),
        ev.last().copied().unwrap_or(0.0) - 1.0,
        -evg.first().copied().unwrap_or(0.0),
        evg.last().copied().unwrap_or(0.0) - 1.0,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let n = m.nrows();
    let fixed = if excess > 0.0 {
        (m + Mat::<T>::identity(n, n).scale(excess)).scale(1.0 / (1.0 + 2.0 * excess))
    } else {
        m.clone()
    };
    (inner(delta, &fixed), fixed)
}

/// Solves the PPT-relaxed discrimination problem for the Hermitian operator
/// `delta`, transposing the factors in `party`.
pub fn solve_ppt(delta: &Operator, party: &[&str], opts: &PptOptions) -> Result<PptSolution> {
    if !delta.is_finite() {
        return Err(Error::Numeric("non-finite operator passed to PPT solver".into()));
    }
    if party.is_empty() {
        return Err(layout_err("PPT solver needs at least one transposed factor"));
    }
    let pt = PartialTranspose::new(delta.layout(), party)?;
    if delta.matrix().iter().all(|z| z.im == 0.0) {
        solve_in::<f64>(delta.matrix(), &pt, opts)
    } else {
        solve_in::<Complex64>(delta.matrix(), &pt, opts)
    }
}

fn solve_in<T: Scalar>(delta: &CMatrix, pt: &PartialTranspose, opts: &PptOptions) -> Result<PptSolution> {
    let d: Mat<T> = herm(delta.map(T::from_complex));
    let n = d.nrows();
    let scale: f64 = eigenvalues(&d).iter().map(|x| x.abs()).sum();
    let half = Mat::<T>::identity(n, n).scale(0.5);
    if scale < 1e-300 {
        return Ok(PptSolution {
            upper: 0.0,
            lower: 0.0,
            measurement: half.map(T::to_complex),
            newton_steps: 0,
            cg_steps: 0,
        });
    }

    let basis = if hermitian_dim::<T>(n) <= DENSE_LIMIT {
        hermitian_basis::<T>(n)
    } else {
        Vec::new()
    };
    let mut point = Point::new(half, pt).expect("I/2 is strictly feasible");
    let mut t = 2.0 * n as f64 / scale;
    let mut best_upper = f64::INFINITY;
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_m = point.m.clone();
    let mut newton_steps = 0;
    let mut cg_steps = 0;

    let mut stalled = false;
    let mut tiny_steps = 0usize;
    loop {
        // centering
        loop {
            if newton_steps >= opts.max_newton {
                stalled = true;
                break;
            }
            newton_steps += 1;
            let grad = herm(d.scale(-t) + point.primal.gradient() + pt.apply(&point.dual.gradient()));
            let wa = point.primal.weights();
            let wb = point.dual.weights();
            let hess = |v: &Mat<T>| -> Mat<T> {
                let a = point.primal.from_basis(&hadamard(&point.primal.in_basis(v), &wa));
                let vg = pt.apply(v);
                let b = point.dual.from_basis(&hadamard(&point.dual.in_basis(&vg), &wb));
                herm(a + pt.apply(&b))
            };
            // exact inverse of the primal block, dual block replaced by the
            // mean of its diagonal weights
            let shift = (0..n).map(|i| wb[(i, i)]).sum::<f64>() / n as f64;
            let wp = wa.map(|w| w + shift);
            let precond = |r: &Mat<T>| -> Mat<T> {
                herm(point.primal.from_basis(&hadamard_div(&point.primal.in_basis(r), &wp)))
            };

            let rhs = -&grad;
            let dense = if basis.is_empty() { None } else { dense_solve(&hess, &basis, &rhs) };
            let (step, iters) = match dense {
                Some(x) => (x, 0),
                None => pcg(&hess, &precond, &rhs, opts.max_cg),
            };
            cg_steps += iters;
            let decrement2 = -inner(&grad, &step);
            if !(decrement2 > 0.0) {
                break;
            }
            let lambda = decrement2.sqrt();
            // Objective change along the step, with the linear part taken
            // from the step itself: at large t the total objective is too
            // large for a difference of two evaluations to resolve it.
            let slope = -t * inner(&d, &step);
            let b0 = point.barrier();
            let mut s = if lambda > 0.25 { 1.0 / (1.0 + lambda) } else { 1.0 };
            let mut accepted = None;
            for _ in 0..60 {
                let cand = herm(&point.m + step.scale(s));
                if let Some(p) = Point::new(cand, pt) {
                    if s * slope + (p.barrier() - b0) <= -0.25 * s * decrement2 || decrement2 < 1e-12 {
                        accepted = Some(p);
                        break;
                    }
                }
                s *= 0.5;
            }
            match accepted {
                Some(p) => point = p,
                None => {
                    stalled = true;
                    break;
                }
            }
            if s < 1e-9 {
                tiny_steps += 1;
                if tiny_steps >= 8 {
                    stalled = true;
                    break;
                }
            } else {
                tiny_steps = 0;
            }
            if decrement2 / 2.0 < 1e-9 {
                break;
            }
        }

        let upper = certificate(&point, t, &d, pt);
        let (lower, m_feasible) = feasible_value(&point.m, &d, pt);
        if upper < best_upper {
            best_upper = upper;
        }
        if lower > best_lower {
            best_lower = lower;
            best_m = m_feasible;
        }
        if best_upper - best_lower <= opts.gap {
            break;
        }
        if stalled {
            if best_upper - best_lower <= opts.stall_gap {
                break;
            }
            return Err(Error::Solver {
                iterations: newton_steps,
                lower: best_lower,
                upper: best_upper,
            });
        }
        t *= opts.mu;
    }

    Ok(PptSolution {
        upper: best_upper,
        lower: best_lower,
        measurement: best_m.map(T::to_complex),
        newton_steps,
        cg_steps,
    })
}

/// Preconditioned conjugate gradients on Hermitian matrices with the
/// Hilbert-Schmidt inner product.
fn pcg<T: Scalar>(
    apply: &impl Fn(&Mat<T>) -> Mat<T>,
    precond: &impl Fn(&Mat<T>) -> Mat<T>,
    rhs: &Mat<T>,
    max_iter: usize,
) -> (Mat<T>, usize) {
    let n = rhs.nrows();
    let mut x = Mat::<T>::zeros(n, n);
    let mut r = rhs.clone();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = inner(&r, &z);
    let target = 1e-10 * inner(rhs, rhs).sqrt();
    for it in 0..max_iter {
        let ap = apply(&p);
        let pap = inner(&p, &ap);
        if !(pap > 0.0) {
            return (if it == 0 { z } else { x }, it);
        }
        let alpha = rz / pap;
        x += p.scale(alpha);
        r -= ap.scale(alpha);
        if inner(&r, &r).sqrt() <= target {
            return (x, it + 1);
        }
        z = precond(&r);
        let rz_next = inner(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p = &z + p.scale(beta);
    }
    (x, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::sample_ginibre;

    #[test]
    fn complex_and_real_paths_agree_on_real_input() {
        let layout = TensorLayout::from_pairs(&[("A", 2), ("B", 2)]).unwrap();
        let mut rng = crate::rng::SeedStream::new(3).rng("t", 0);
        let a = sample_ginibre(&layout, &mut rng).unwrap();
        let b = sample_ginibre(&layout, &mut rng).unwrap();
        let delta = a.difference(&b).unwrap();
        let real = delta.matrix().map(|z| Complex64::new(z.re, 0.0));
        let real = herm(real);
        let pt = PartialTranspose::new(&layout, &["A"]).unwrap();
        let opts = PptOptions::default();
        let r = solve_in::<f64>(&real, &pt, &opts).unwrap();
        let c = solve_in::<Complex64>(&real, &pt, &opts).unwrap();
        assert!((r.upper - c.upper).abs() < 1e-6);
        assert!(r.gap() <= opts.gap && c.gap() <= opts.gap);
    }
}
