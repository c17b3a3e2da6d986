//! Dense complex linear algebra on labeled tensor factors.
//!
//! Operators are stored densely; every multi-party operation (partial trace,
//! partial transpose, permutation) addresses factors by label, never by
//! position, so reordering is always an explicit [`Operator::permute`].

mod io;
mod layout;
mod operator;
mod spectral;

pub use io::{density_from_json, operator_from_json, operator_to_json, OperatorFile};
pub(crate) use io::parse_json;
pub use layout::{Factor, Party, TensorLayout};
pub use operator::{CMatrix, CVector, DensityOperator, Operator, PureState};
pub use spectral::{
    eigenvalues, eigh, fidelity, hermitize, min_eigenvalue, positive_part_trace, positive_projector,
    shannon_entropy, sqrt_psd, trace_norm, trace_product, von_neumann_entropy, Eigh,
};

use crate::error::Result;

/// a ⊗ b.
pub fn tensor(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    a.tensor(b)
}

/// Traces out the factors named in `drop`.
pub fn partial_trace(m: &DensityOperator, drop: &[&str]) -> Result<DensityOperator> {
    m.partial_trace(drop)
}

/// Transposes the factors named in `party`.
pub fn partial_transpose(m: &DensityOperator, party: &[&str]) -> Result<Operator> {
    m.partial_transpose(party)
}
