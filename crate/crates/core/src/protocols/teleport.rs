//! Exact density-matrix teleportation through a maximally entangled resource.

use num_complex::Complex64;

use crate::error::{layout_err, Error, Result};
use crate::qmat::{CMatrix, DensityOperator, Factor, Operator, PureState, TensorLayout};
use crate::states::make_max_entangled_on;

#[derive(Debug, Clone)]
pub struct Teleported {
    /// Input with the teleported factor removed and re-attached last under
    /// its new label.
    pub state: DensityOperator,
    /// Probability of each Bell outcome (a, b), index a·L + b.
    pub branch_probabilities: Vec<f64>,
    pub resource_consumed: bool,
}

/// Generalized Pauli X^a Z^b on C^L.
fn weyl(l: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(l, l);
    for i in 0..l {
        let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (b * i) as f64 / l as f64);
        m[((i + a) % l, i)] = phase;
    }
    m
}

fn check_resource(resource: &PureState) -> Result<(String, String, usize)> {
    let f = resource.layout().factors();
    if f.len() != 2 || f[0].dim != f[1].dim {
        return Err(layout_err("teleportation resource must be a two-factor state of equal dims"));
    }
    let l = f[0].dim;
    let ideal = make_max_entangled_on(l, &f[0].label, &f[1].label)?;
    let overlap = ideal.overlap(resource)?.norm();
    if (overlap - 1.0).abs() > 1e-10 {
        return Err(Error::Resource(format!(
            "resource is not maximally entangled (|⟨φ_L|r⟩| = {overlap})"
        )));
    }
    Ok((f[0].label.clone(), f[1].label.clone(), l))
}

/// Teleports factor `source` of `input` through `resource` (consumed), which
/// must be |φ_L⟩ (up to a global phase) with L = dim(source). The output
/// carries the teleported system on Bob's side under label `dest`.
pub fn teleport(input: &DensityOperator, source: &str, resource: PureState, dest: &str) -> Result<Teleported> {
    let dim_x = input
        .layout()
        .dim_of(source)
        .ok_or_else(|| layout_err(format!("unknown label {source:?}")))?;
    let (ra, rb, l) = check_resource(&resource)?;
    if dim_x != l {
        return Err(layout_err(format!(
            "cannot teleport a {dim_x}-dimensional factor with a rank-{l} resource"
        )));
    }
    let rest: Vec<Factor> = input
        .layout()
        .factors()
        .iter()
        .filter(|f| f.label != source)
        .cloned()
        .collect();
    if rest.iter().any(|f| f.label == dest) {
        return Err(layout_err(format!("destination label {dest:?} already in use")));
    }
    let d_rest: usize = rest.iter().map(|f| f.dim).product();

    let joint = input.tensor(&resource.density())?;
    let mut order: Vec<&str> = vec![source, ra.as_str()];
    order.extend(rest.iter().map(|f| f.label.as_str()));
    order.push(rb.as_str());
    let joint = joint.permute(&order)?;
    let rho = joint.matrix();

    let phi = make_max_entangled_on(l, "x", "y")?;
    let id_rest = CMatrix::identity(d_rest, d_rest);
    let n_out = d_rest * l;
    let mut out = CMatrix::zeros(n_out, n_out);
    let mut branch_probabilities = Vec::with_capacity(l * l);
    for a in 0..l {
        for b in 0..l {
            let v = weyl(l, a, b);
            let bell = v.kronecker(&CMatrix::identity(l, l)) * phi.amplitudes();
            let bra = bell.adjoint();
            let k = bra.kronecker(&id_rest).kronecker(&v);
            let branch = &k * rho * k.adjoint();
            branch_probabilities.push(branch.trace().re);
            out += branch;
        }
    }

    let mut out_factors = rest;
    out_factors.push(Factor::new(dest, l));
    let layout = TensorLayout::new(out_factors)?;
    let state = DensityOperator::from_operator(Operator::new(layout, out)?.hermitian_part())?;
    Ok(Teleported {
        state,
        branch_probabilities,
        resource_consumed: true,
    })
}
