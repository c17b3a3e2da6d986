//! Numerical tolerances shared by every invariant check.

/// Tolerances used when validating operators, channels and solver output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise |M - M†| for a Hermitian operator.
    pub hermitian: f64,
    /// Smallest eigenvalue accepted as "non-negative".
    pub psd: f64,
    /// Max |Tr ρ - 1| for a density operator.
    pub trace: f64,
    /// Max |‖ψ‖ - 1| for a pure state.
    pub pure_norm: f64,
    /// POVM completeness and element positivity.
    pub povm: f64,
    /// Target duality gap of the PPT solver.
    pub sdp_gap: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        hermitian: 1e-10,
        psd: 1e-9,
        trace: 1e-10,
        pure_norm: 1e-12,
        povm: 1e-9,
        sdp_gap: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
