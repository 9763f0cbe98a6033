//! Pure-state dynamics in Stratonovich form, `dρ = 𝓐(ρ)dt + Σ 𝓑_j(ρ)∘dW_j`,
//! and the deterministic flow of a single diffusion field.

use nalgebra::DVector;

use super::grid::TimeGrid;
use super::kernel::Noise;
use super::trajectory::{trajectory_rng, PosteriorTrajectory, Recorder, SimOptions};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, matrix_exp, ComplexMatrix, PureStateVector, QuantumState, C64, I};
use crate::model::{check_pure_preserving, MeasurementModel};

/// `𝓑_j(ρ) = L_jρ + ρL_j* − ⟨L_j + L_j*, ρ⟩ρ`
pub fn diffusion_field(m: &MeasurementModel, rho: &ComplexMatrix, j: usize) -> ComplexMatrix {
    let l = &m.diffusive_ops()[j];
    let ld = &m.diffusive_adj()[j];
    let x = l + ld;
    let mj = (&x * rho).trace().re;
    let mut b = &(l * rho) + &(rho * ld);
    b.axpy(C64::new(-mj, 0.0), rho);
    b
}

/// Drift of the Stratonovich form:
/// `𝓐(ρ) = −i[H,ρ] + Σ_j { m_j 𝓑_j(ρ) − ½[(L_j+L_j*)L_jρ − ⟨L_j+L_j*, L_jρ⟩ρ]
///                         − ½[ρL_j*(L_j+L_j*) − ⟨L_j+L_j*, ρL_j*⟩ρ] }`.
pub fn drift_field(m: &MeasurementModel, rho: &ComplexMatrix) -> ComplexMatrix {
    let mut a = m.hamiltonian().commutator(rho).scale(-I);
    for (j, (l, ld)) in m.diffusive_ops().iter().zip(m.diffusive_adj()).enumerate() {
        let x = l + ld;
        let mj = (&x * rho).trace().re;
        a.axpy(C64::new(mj, 0.0), &diffusion_field(m, rho, j));
        let left = &(&x * l) * rho;
        let right = &(rho * ld) * &x;
        let c = (left.trace() + right.trace()).re;
        a.axpy(C64::new(-0.5, 0.0), &(&left + &right));
        a.axpy(C64::new(0.5 * c, 0.0), rho);
    }
    a
}

fn dominant_projector(a: &ComplexMatrix) -> QuantumState {
    let pairs = hermitian_eigen(&a.hermitize());
    PureStateVector::from_trusted(pairs[0].vector.clone()).projector()
}

pub fn simulate_stratonovich_pure(
    m: &MeasurementModel,
    psi0: &PureStateVector,
    grid: &TimeGrid,
    seed: u64,
) -> Result<PosteriorTrajectory> {
    simulate_stratonovich_pure_with(m, psi0, grid, seed, &SimOptions::default())
}

/// Heun predictor-corrector on the matrix form of the equation, followed by
/// projection onto the dominant eigenvector so that the state stays on the
/// pure-state manifold.
pub fn simulate_stratonovich_pure_with(
    m: &MeasurementModel,
    psi0: &PureStateVector,
    grid: &TimeGrid,
    seed: u64,
    opts: &SimOptions,
) -> Result<PosteriorTrajectory> {
    if !m.jump_channels().is_empty() {
        return Err(Error::JumpChannelsPresent);
    }
    if check_pure_preserving(m, 1, seed)?.dissipation_present {
        return Err(Error::NotPurePreserving);
    }
    if psi0.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: psi0.dim() });
    }
    let n_diff = m.diffusive_ops().len();
    let mut rng = trajectory_rng(seed);
    let mut noise = Noise::new(n_diff, 0);
    let mut rec = Recorder::new(n_diff, 0, grid.n_steps(), opts.record_output, true);
    let record_steps = grid.record_indices(opts.record_every);
    let mut next_record = 0;
    let mut dy = vec![0.0; n_diff];
    let xs: Vec<ComplexMatrix> = m.diffusive_ops().iter().zip(m.diffusive_adj()).map(|(l, ld)| l + ld).collect();

    let mut rho = psi0.projector();
    let mut state_path = Vec::with_capacity(record_steps.len());
    let mut entropy_path = Vec::with_capacity(record_steps.len());
    for step in 0..=grid.n_steps() {
        if record_steps.get(next_record) == Some(&step) {
            entropy_path.push(rho.linear_entropy());
            state_path.push(rho.clone());
            rec.snapshot();
            next_record += 1;
        }
        if step == grid.n_steps() {
            break;
        }
        let h = grid.step_len(step);
        noise.draw(&mut rng, h);
        let r = rho.matrix();
        for (j, y) in dy.iter_mut().enumerate() {
            *y = noise.dw[j] + (&xs[j] * r).trace().re * h;
        }
        let a0 = drift_field(m, r);
        let b0: Vec<_> = (0..n_diff).map(|j| diffusion_field(m, r, j)).collect();
        let mut pred = r + &a0.scale_real(h);
        for (b, w) in b0.iter().zip(&noise.dw) {
            pred.axpy(C64::new(*w, 0.0), b);
        }
        let mut next = r + &(&a0 + &drift_field(m, &pred)).scale_real(0.5 * h);
        for (j, b) in b0.iter().enumerate() {
            let avg = b + &diffusion_field(m, &pred, j);
            next.axpy(C64::new(0.5 * noise.dw[j], 0.0), &avg);
        }
        if !next.is_finite() {
            return Err(Error::ZeroTrace);
        }
        rho = dominant_projector(&next);
        rec.add(&dy, Some(&noise.dw));
        rec.end_step();
    }
    Ok(PosteriorTrajectory { grid: *grid, record_steps, state_path, entropy_path, output: rec.finish() })
}

/// Solution of `ρ̇ = ±𝓑₁(ρ)` on `[0, t_final]`.
#[derive(Clone, Debug)]
pub struct FlowResult {
    pub times: Vec<f64>,
    pub path: Vec<QuantumState>,
    /// Final state, when the last two samples differ by less than `1e-9` in
    /// Hilbert-Schmidt norm.
    pub limit: Option<QuantumState>,
}

pub const DEFAULT_FLOW_POINTS: usize = 1000;

pub fn deterministic_flow(
    m: &MeasurementModel,
    psi0: &PureStateVector,
    t_final: f64,
    sign: f64,
    channel: Option<usize>,
) -> Result<FlowResult> {
    deterministic_flow_with(m, psi0, t_final, sign, channel, DEFAULT_FLOW_POINTS)
}

/// `ρ_t = |ψ_t⟩⟨ψ_t|/‖ψ_t‖²` with `ψ_t = e^{±L t}ψ₀`, sampled at `n_points`
/// equally spaced times after `t = 0`. `channel` selects the diffusive
/// operator; it may be omitted when the model has exactly one.
pub fn deterministic_flow_with(
    m: &MeasurementModel,
    psi0: &PureStateVector,
    t_final: f64,
    sign: f64,
    channel: Option<usize>,
    n_points: usize,
) -> Result<FlowResult> {
    let count = m.diffusive_ops().len();
    let j = match (channel, count) {
        (_, 0) => return Err(Error::NoDiffusiveChannels),
        (Some(j), _) if j >= count => return Err(Error::BadChannelIndex { index: j, count }),
        (Some(j), _) => j,
        (None, 1) => 0,
        (None, c) => return Err(Error::MultipleDiffusiveOps(c)),
    };
    if psi0.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: psi0.dim() });
    }
    if !(t_final > 0.0 && t_final.is_finite()) || n_points == 0 || !(sign == 1.0 || sign == -1.0) {
        return Err(Error::InvalidArgument("flow needs t_final > 0, n_points ≥ 1 and sign ±1".into()));
    }
    let dt = t_final / n_points as f64;
    let step = matrix_exp(&m.diffusive_ops()[j].scale_real(sign * dt));
    let mut psi: DVector<C64> = psi0.amplitudes().clone();
    let mut times = vec![0.0];
    let mut path = vec![psi0.projector()];
    for i in 1..=n_points {
        psi = step.apply(&psi);
        let norm = psi.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::ZeroTrace);
        }
        psi /= C64::new(norm, 0.0);
        times.push(i as f64 * dt);
        path.push(PureStateVector::from_trusted(psi.clone()).projector());
    }
    let k = path.len();
    let limit = (k >= 2 && (path[k - 1].matrix() - path[k - 2].matrix()).hs_norm() < 1e-9).then(|| path[k - 1].clone());
    Ok(FlowResult { times, path, limit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::linalg::{matrix_exp_action, ONE, ZERO};
    use crate::model::ModelBuilder;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diffusion_vanishes_on_eigenprojector() {
        let m = ModelBuilder::new(2).diffusive(&sigma_z()).build().unwrap();
        for k in 0..2 {
            let rho = QuantumState::basis(2, k);
            assert!(diffusion_field(&m, rho.matrix(), 0).hs_norm() < 1e-15);
        }
    }

    #[test]
    fn drift_without_measurement_is_commutator() {
        let m = ModelBuilder::new(2).hamiltonian(&sigma_x()).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = PureStateVector::haar(2, &mut rng).projector();
        let expected = sigma_x().commutator(rho.matrix()).scale(-I);
        assert!((drift_field(&m, rho.matrix()) - expected).hs_norm() < 1e-15);
    }

    #[test]
    fn ito_and_stratonovich_drifts_differ_by_half_the_correction() {
        // 𝓐 = 𝓛 − ½ Σ D𝓑_j[𝓑_j] on pure states of a pure-preserving model.
        let l = &sigma_minus() + &sigma_z().scale(C64::new(0.3, 0.2));
        let m = ModelBuilder::new(2).hamiltonian(&sigma_y()).diffusive(&l).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = PureStateVector::haar(2, &mut rng).projector().into_matrix();
        let b = diffusion_field(&m, &rho, 0);
        let eps = 1e-6;
        let plus = diffusion_field(&m, &(&rho + &b.scale_real(eps)), 0);
        let minus = diffusion_field(&m, &(&rho - &b.scale_real(eps)), 0);
        let db_b = (&plus - &minus).scale_real(0.5 / eps);
        let ito = m.liouvillian(&rho);
        let expected = &ito - &db_b.scale_real(0.5);
        assert!((drift_field(&m, &rho) - expected).hs_norm() < 1e-8);
    }

    #[test]
    fn stratonovich_rejects_jumps_and_dissipation() {
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        let psi = PureStateVector::basis(2, 0);
        let m = ModelBuilder::new(2).jump_channel("c", 1.0, &[sigma_minus()]).dissipative(&sigma_z()).build().unwrap();
        assert!(matches!(simulate_stratonovich_pure(&m, &psi, &g, 0), Err(Error::JumpChannelsPresent)));
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).dissipative(&sigma_z()).build().unwrap();
        assert!(matches!(simulate_stratonovich_pure(&m, &psi, &g, 0), Err(Error::NotPurePreserving)));
    }

    #[test]
    fn stratonovich_paths_stay_pure() {
        let m = ModelBuilder::new(2).hamiltonian(&sigma_x()).diffusive(&sigma_minus()).build().unwrap();
        let g = TimeGrid::new(2.0, 1e-3).unwrap();
        let tr = simulate_stratonovich_pure(&m, &PureStateVector::basis(2, 0), &g, 3).unwrap();
        assert!(tr.entropy_path.iter().all(|&e| e <= 1e-6));
    }

    #[test]
    fn decay_flow_converges_to_ground() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).build().unwrap();
        let psi = PureStateVector::normalized(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let f = deterministic_flow(&m, &psi, 1e7, 1.0, None).unwrap();
        let limit = f.limit.expect("converged");
        assert!((limit.matrix() - QuantumState::basis(2, 1).matrix()).hs_norm() < 1e-6);
    }

    #[test]
    fn ground_state_is_fixed_by_decay_flow() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).build().unwrap();
        let psi = PureStateVector::basis(2, 1);
        let f = deterministic_flow(&m, &psi, 10.0, 1.0, None).unwrap();
        assert!(f.path.iter().all(|r| r == &psi.projector()));
    }

    #[test]
    fn dominant_eigenvector_wins() {
        let m = ModelBuilder::new(2).diffusive(&sigma_z()).build().unwrap();
        let psi = PureStateVector::normalized(vec![ONE, ONE]).unwrap();
        let f = deterministic_flow_with(&m, &psi, 20.0, 1.0, None, 200).unwrap();
        // Oracle: e^{σ_z t}ψ normalized.
        let v = matrix_exp_action(&sigma_z(), 20.0, psi.amplitudes()).unwrap();
        let oracle = PureStateVector::normalized(v.iter().copied().collect()).unwrap().projector();
        assert!((f.path.last().unwrap().matrix() - oracle.matrix()).hs_norm() < 1e-12);
        assert!(f.limit.is_some());
        assert!((oracle.matrix().get(0, 0) - ONE).norm() < 1e-12);
        // The reversed flow selects the other eigenvector.
        let back = deterministic_flow_with(&m, &psi, 20.0, -1.0, None, 200).unwrap();
        assert!((back.path.last().unwrap().matrix().get(0, 0) - ZERO).norm() < 1e-12);
    }

    #[test]
    fn flow_needs_designated_channel() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).diffusive(&sigma_z()).build().unwrap();
        let psi = PureStateVector::basis(2, 0);
        assert!(matches!(deterministic_flow(&m, &psi, 1.0, 1.0, None), Err(Error::MultipleDiffusiveOps(2))));
        assert!(deterministic_flow(&m, &psi, 1.0, 1.0, Some(1)).is_ok());
    }
}
