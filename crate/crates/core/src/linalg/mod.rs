//! Dense complex linear algebra on the operator spaces of a finite-dimensional
//! Hilbert space. At finite dimension bounded, Hilbert-Schmidt and trace-class
//! operators are all just `n×n` complex matrices; the three norms
//! `‖·‖∞ ≤ ‖·‖₂ ≤ ‖·‖₁` are methods on [`ComplexMatrix`] and [`trace_norm`].

mod decomp;
mod matrix;
mod policy;
mod state;

pub(crate) use decomp::hermitian_eigen;
pub use decomp::{
    hs_inner, matrix_exp, matrix_exp_action, simplex_projection, spectral_decomposition, trace_norm, EigenPair,
};
pub use matrix::{pauli, ComplexMatrix, C64, I, ONE, ZERO};
pub use policy::NumericPolicy;
pub use state::{project_to_state, repair_positive, PureStateVector, QuantumState};
