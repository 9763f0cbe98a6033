//! Post-processing of trajectories: entropies, time averages and the ergodic
//! identities linking them to the stationary state, empirical invariant
//! measures on the Bloch sphere, and the Lie-rank condition.

mod bloch;
mod lie;

pub use bloch::{
    bloch_vector, empirical_invariant_measure, great_circle_concentration, BlochHistogram, GreatCircleFit,
    MIXED_STATE_ENTROPY,
};
pub use lie::{gell_mann_basis, lie_rank_check, LieRankReport};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, hs_inner, project_to_state, ComplexMatrix, QuantumState, C64};
use crate::sde::PosteriorTrajectory;

/// `Tr{ρ(1 − ρ)}`
pub fn linear_entropy(rho: &QuantumState) -> f64 {
    rho.linear_entropy()
}

/// `−Tr{ρ ln ρ}`, with eigenvalues below `1e-14` contributing nothing.
pub fn von_neumann_entropy(rho: &QuantumState) -> f64 {
    hermitian_eigen(rho.matrix())
        .iter()
        .map(|p| p.value)
        .filter(|&v| v >= 1e-14)
        .map(|v| -v * v.ln())
        .sum::<f64>()
        .max(0.0)
}

/// `D²(a; ρ) = ⟨a*a, ρ⟩ − |⟨a, ρ⟩|²`, clipped at zero.
pub fn quantum_variance(a: &ComplexMatrix, rho: &QuantumState) -> Result<f64> {
    let second = hs_inner(&(&a.adjoint() * a), rho.matrix())?.re;
    let first = hs_inner(a, rho.matrix())?.norm_sqr();
    Ok((second - first).max(0.0))
}

/// Recorded samples at or after `burn_in` with trapezoid weights that sum to
/// the window length.
pub(crate) fn window(traj: &PosteriorTrajectory, burn_in: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    let t_final = traj.grid.t_final();
    let times = traj.times();
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= burn_in).collect();
    if burn_in.is_nan() || burn_in >= t_final || idx.len() < 2 {
        return Err(Error::EmptyWindow { burn_in, t_final });
    }
    let mut w = vec![0.0; idx.len()];
    for k in 0..idx.len() - 1 {
        let h = times[idx[k + 1]] - times[idx[k]];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    Ok((idx, w))
}

/// Trapezoid time average of the states recorded after `burn_in`, projected
/// onto the state space.
pub fn time_average_state(traj: &PosteriorTrajectory, burn_in: f64) -> Result<QuantumState> {
    let (idx, w) = window(traj, burn_in)?;
    let total: f64 = w.iter().sum();
    let mut acc = ComplexMatrix::zeros(traj.state_path[0].dim());
    for (&i, wi) in idx.iter().zip(&w) {
        acc.axpy(C64::new(wi / total, 0.0), traj.state_path[i].matrix());
    }
    project_to_state(&acc)
}

/// The two sides of `D²(a; η) = ∫ D²(a; ρ) μ(dρ) + ∫ |⟨a, ρ − η⟩|² μ(dρ)`,
/// with the `μ`-integrals replaced by time averages along a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceDecomposition {
    /// `D²(a; η_eq)`
    pub lhs: f64,
    /// Time average of `D²(a; ρ_t)`.
    pub term1: f64,
    /// Time average of `|⟨a, ρ_t − η_eq⟩|²`.
    pub term2: f64,
    /// `lhs − term1 − term2`
    pub residual: f64,
}

pub fn variance_decomposition(
    a: &ComplexMatrix,
    traj: &PosteriorTrajectory,
    eta_eq: &QuantumState,
    burn_in: f64,
) -> Result<VarianceDecomposition> {
    let (idx, w) = window(traj, burn_in)?;
    let total: f64 = w.iter().sum();
    let lhs = quantum_variance(a, eta_eq)?;
    let mean_eq = hs_inner(a, eta_eq.matrix())?;
    let (mut term1, mut term2) = (0.0, 0.0);
    for (&i, wi) in idx.iter().zip(&w) {
        let rho = &traj.state_path[i];
        term1 += wi * quantum_variance(a, rho)?;
        term2 += wi * (hs_inner(a, rho.matrix())? - mean_eq).norm_sqr();
    }
    term1 /= total;
    term2 /= total;
    Ok(VarianceDecomposition { lhs, term1, term2, residual: lhs - term1 - term2 })
}

/// Comparison of a long trajectory's time averages with the stationary
/// state of the master equation.
#[derive(Clone, Debug)]
pub struct ErgodicReport {
    pub time_avg_state: QuantumState,
    pub eta_eq: QuantumState,
    /// `‖time_avg_state − η_eq‖₂`
    pub distance: f64,
    /// Named observables and their variance decompositions.
    pub variance_decomposition: Vec<(String, VarianceDecomposition)>,
}

pub fn ergodic_report(
    traj: &PosteriorTrajectory,
    eta_eq: &QuantumState,
    burn_in: f64,
    observables: &[(String, ComplexMatrix)],
) -> Result<ErgodicReport> {
    let time_avg_state = time_average_state(traj, burn_in)?;
    let distance = (time_avg_state.matrix() - eta_eq.matrix()).hs_norm();
    let variance_decomposition = observables
        .iter()
        .map(|(name, a)| Ok((name.clone(), variance_decomposition(a, traj, eta_eq, burn_in)?)))
        .collect::<Result<_>>()?;
    Ok(ErgodicReport { time_avg_state, eta_eq: eta_eq.clone(), distance, variance_decomposition })
}
