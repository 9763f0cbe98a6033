/// Every numerical gate used to decide whether a finite-precision object
/// counts as Hermitian, positive, normalized, pure or rank-deficient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericPolicy {
    /// Per-dimension bound on `‖ρ − ρ*‖₂` for states.
    pub state_hermitian_tol: f64,
    /// Smallest admissible eigenvalue of a state.
    pub state_psd_tol: f64,
    /// Bound on `|Tr ρ − 1|`.
    pub state_trace_tol: f64,
    /// Per-dimension Hermiticity gate of `spectral_decomposition`.
    pub eig_hermitian_tol: f64,
    /// Linear entropy below which a state is treated as pure.
    pub purity_tol: f64,
    /// Bound on `|‖ψ‖ − 1|` for pure-state vectors.
    pub vector_norm_tol: f64,
    /// Per-dimension Hermiticity gate for model Hamiltonians.
    pub hamiltonian_tol: f64,
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self {
            state_hermitian_tol: 1e-12,
            state_psd_tol: 1e-10,
            state_trace_tol: 1e-12,
            eig_hermitian_tol: 1e-10,
            purity_tol: 1e-9,
            vector_norm_tol: 1e-12,
            hamiltonian_tol: 1e-12,
        }
    }
}
