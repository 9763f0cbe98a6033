//! Single-trajectory integrators for the linear equation under the reference
//! law and the nonlinear a-posteriori equation under the physical law.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::grid::TimeGrid;
use super::kernel::{substeps_for, Kernel, Noise, Scheme};
use crate::error::{Error, Result};
use crate::linalg::{project_to_state, repair_positive, ComplexMatrix, QuantumState, C64};
use crate::model::MeasurementModel;

/// Name of the random number generator recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8";

/// Per-trajectory generator: trajectory `i` of a run seeded with `seed` uses
/// `seed + i`.
pub fn trajectory_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WEIGHT_FLOOR: f64 = 1e-14;
const INTENSITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimOptions {
    pub scheme: Scheme,
    /// Keep every `record_every`-th grid point of the state path (the last
    /// point is always kept).
    pub record_every: usize,
    /// Store the per-step Wiener increments.
    pub record_output: bool,
    /// Subdivide steps whose jump-intensity bound exceeds 0.1 instead of
    /// failing with `StepTooLarge`.
    pub adaptive: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { scheme: Scheme::default(), record_every: 1, record_output: true, adaptive: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JumpEvent {
    pub step: usize,
    pub channel: usize,
}

/// The measurement record of one trajectory.
#[derive(Clone, Debug, Default)]
pub struct OutputRecord {
    /// Output increments per diffusive channel and grid step: `ΔW_j` under
    /// the reference law, `ΔW̃_j + m_j dt` under the physical law. Empty when
    /// output recording is off.
    pub wiener_paths: Vec<Vec<f64>>,
    /// Innovation increments `ΔW̃_j`, physical-law runs only.
    pub compensated_wiener: Option<Vec<Vec<f64>>>,
    pub jump_events: Vec<JumpEvent>,
    /// At each recorded time: cumulative diffusive outputs followed by
    /// cumulative jump counts.
    pub cumulative: Vec<Vec<f64>>,
    /// Per channel: `(Σ ΔW̃, Σ ΔW̃², number of increments)`.
    pub innovation_moments: Vec<(f64, f64, usize)>,
}

impl OutputRecord {
    pub fn jump_counts(&self, n_channels: usize) -> Vec<usize> {
        let mut counts = vec![0; n_channels];
        for e in &self.jump_events {
            counts[e.channel] += 1;
        }
        counts
    }
}

/// Accumulates the output record while stepping.
pub(crate) struct Recorder {
    record: OutputRecord,
    running: Vec<f64>,
    n_diff: usize,
    keep_increments: bool,
    step_dy: Vec<f64>,
    step_dw: Vec<f64>,
}

impl Recorder {
    pub fn new(n_diff: usize, n_jump: usize, n_steps: usize, keep_increments: bool, physical: bool) -> Self {
        let paths = || if keep_increments { vec![Vec::with_capacity(n_steps); n_diff] } else { Vec::new() };
        let record = OutputRecord {
            wiener_paths: paths(),
            compensated_wiener: physical.then(paths),
            jump_events: Vec::new(),
            cumulative: Vec::new(),
            innovation_moments: if physical { vec![(0.0, 0.0, 0); n_diff] } else { Vec::new() },
        };
        Self {
            record,
            running: vec![0.0; n_diff + n_jump],
            n_diff,
            keep_increments,
            step_dy: vec![0.0; n_diff],
            step_dw: vec![0.0; n_diff],
        }
    }

    /// Adds one substep: output increments `dy` and innovations `dw`.
    pub fn add(&mut self, dy: &[f64], dw: Option<&[f64]>) {
        for ((acc, run), &x) in self.step_dy.iter_mut().zip(&mut self.running).zip(dy) {
            *acc += x;
            *run += x;
        }
        if let Some(dw) = dw {
            for ((acc, m), &x) in self.step_dw.iter_mut().zip(&mut self.record.innovation_moments).zip(dw) {
                *acc += x;
                m.0 += x;
                m.1 += x * x;
                m.2 += 1;
            }
        }
    }

    pub fn jump(&mut self, step: usize, channel: usize) {
        self.record.jump_events.push(JumpEvent { step, channel });
        self.running[self.n_diff + channel] += 1.0;
    }

    pub fn end_step(&mut self) {
        if self.keep_increments {
            for j in 0..self.n_diff {
                self.record.wiener_paths[j].push(self.step_dy[j]);
                if let Some(c) = &mut self.record.compensated_wiener {
                    c[j].push(self.step_dw[j]);
                }
            }
        }
        self.step_dy.iter_mut().for_each(|x| *x = 0.0);
        self.step_dw.iter_mut().for_each(|x| *x = 0.0);
    }

    pub fn snapshot(&mut self) {
        self.record.cumulative.push(self.running.clone());
    }

    pub fn finish(self) -> OutputRecord {
        self.record
    }
}

/// Unnormalized solution `σ_t` of the linear equation under the reference
/// law; its trace is the likelihood weight of the path.
#[derive(Clone, Debug)]
pub struct LinearTrajectory {
    pub grid: TimeGrid,
    /// Grid indices of the recorded points.
    pub record_steps: Vec<usize>,
    pub sigma_path: Vec<ComplexMatrix>,
    pub weight_path: Vec<f64>,
    pub output: OutputRecord,
}

/// Normalized a-posteriori states `ρ_t` under the physical law.
#[derive(Clone, Debug)]
pub struct PosteriorTrajectory {
    pub grid: TimeGrid,
    pub record_steps: Vec<usize>,
    pub state_path: Vec<QuantumState>,
    /// Linear entropy `g(t) = Tr{ρ_t(1 − ρ_t)}`.
    pub entropy_path: Vec<f64>,
    pub output: OutputRecord,
}

impl PosteriorTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.record_steps.iter().map(|&i| self.grid.time(i)).collect()
    }
}

impl LinearTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.record_steps.iter().map(|&i| self.grid.time(i)).collect()
    }
}

fn check_initial(m: &MeasurementModel, rho0: &QuantumState) -> Result<()> {
    if rho0.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho0.dim() });
    }
    Ok(())
}

/// Largest possible jump intensity `max_k ν_k ‖𝒥*[1](y_k)‖∞`.
fn posterior_intensity_bound(m: &MeasurementModel) -> f64 {
    m.jump_channels().iter().map(|c| c.weight * c.effect().op_norm()).fold(0.0, f64::max)
}

fn linear_intensity_bound(m: &MeasurementModel) -> f64 {
    m.jump_channels().iter().map(|c| c.weight).fold(0.0, f64::max)
}

fn substeps(bound: f64, grid: &TimeGrid, adaptive: bool) -> Result<usize> {
    let r = substeps_for(bound, grid.dt());
    if r > 1 && !adaptive {
        return Err(Error::StepTooLarge(bound * grid.dt()));
    }
    Ok(r)
}

pub fn simulate_linear(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
) -> Result<LinearTrajectory> {
    simulate_linear_with(m, rho0, grid, seed, &SimOptions::default())
}

/// Integrates `dσ = 𝓚[σ]dt + Σ(L_jσ + σL_j*)dW_j + Σ_k(𝒥[σ](y_k) − σ)dN_k`
/// with `N_k` Poisson of rate `ν_k`, thinned to at most one event per channel
/// per step.
pub fn simulate_linear_with(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
    opts: &SimOptions,
) -> Result<LinearTrajectory> {
    check_initial(m, rho0)?;
    let kernel = Kernel::new(m);
    let (n_diff, n_jump) = (kernel.n_diff(), kernel.n_jump());
    let r = substeps(linear_intensity_bound(m), grid, opts.adaptive)?;
    let mut rng = trajectory_rng(seed);
    let mut noise = Noise::new(n_diff, n_jump);
    let mut rec = Recorder::new(n_diff, n_jump, grid.n_steps(), opts.record_output, false);
    let record_steps = grid.record_indices(opts.record_every);
    let mut next_record = 0;

    let mut sigma = rho0.matrix().clone();
    let mut sigma_path = Vec::with_capacity(record_steps.len());
    let mut weight_path = Vec::with_capacity(record_steps.len());
    for step in 0..=grid.n_steps() {
        if record_steps.get(next_record) == Some(&step) {
            weight_path.push(sigma.trace().re);
            sigma_path.push(sigma.clone());
            rec.snapshot();
            next_record += 1;
        }
        if step == grid.n_steps() {
            break;
        }
        let h = grid.step_len(step) / r as f64;
        for _ in 0..r {
            noise.draw(&mut rng, h);
            sigma = linear_substep(&kernel, &sigma, &noise, h, opts.scheme, |k| rec.jump(step, k));
            rec.add(&noise.dw, None);
            let w = sigma.trace().re;
            if w.is_nan() || w < WEIGHT_FLOOR || !sigma.is_finite() {
                return Err(Error::WeightUnderflow { step, weight: w });
            }
        }
        rec.end_step();
    }
    Ok(LinearTrajectory { grid: *grid, record_steps, sigma_path, weight_path, output: rec.finish() })
}

fn linear_substep(
    kernel: &Kernel<'_>,
    sigma: &ComplexMatrix,
    noise: &Noise,
    dt: f64,
    scheme: Scheme,
    mut on_jump: impl FnMut(usize),
) -> ComplexMatrix {
    let channels = kernel.model.jump_channels();
    let next = match scheme {
        Scheme::KrausEuler => {
            let op = kernel.kraus_step_operator(true, &noise.dw, dt);
            let mut s = kernel.kraus_apply(&op, sigma, dt);
            for (k, ch) in channels.iter().enumerate() {
                if noise.u[k] < (ch.weight * dt).min(1.0) {
                    s = ch.apply(&s);
                    on_jump(k);
                }
            }
            s
        }
        Scheme::EulerMaruyama => {
            let mut s = sigma + &kernel.model.k_map(sigma).scale_real(dt);
            for j in 0..kernel.n_diff() {
                s.axpy(C64::new(noise.dw[j], 0.0), &kernel.diffusion(sigma, j));
            }
            for (k, ch) in channels.iter().enumerate() {
                if noise.u[k] < (ch.weight * dt).min(1.0) {
                    s += &ch.apply(sigma);
                    s -= sigma;
                    on_jump(k);
                }
            }
            s
        }
    };
    repair_positive(&next)
}

pub fn simulate_posterior(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
) -> Result<PosteriorTrajectory> {
    simulate_posterior_with(m, rho0, grid, seed, &SimOptions::default())
}

/// Integrates the a-posteriori equation: diffusive innovations `dW̃_j`,
/// output `dY_j = dW̃_j + m_j dt`, and jumps `ρ → 𝒥[ρ](y_k)/λ_k` at rate
/// `λ_k ν_k`. Channels with `λ_k ≤ 1e-12` never fire.
pub fn simulate_posterior_with(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
    opts: &SimOptions,
) -> Result<PosteriorTrajectory> {
    check_initial(m, rho0)?;
    let kernel = Kernel::new(m);
    let (n_diff, n_jump) = (kernel.n_diff(), kernel.n_jump());
    let r = substeps(posterior_intensity_bound(m), grid, opts.adaptive)?;
    let mut rng = trajectory_rng(seed);
    let mut noise = Noise::new(n_diff, n_jump);
    let mut rec = Recorder::new(n_diff, n_jump, grid.n_steps(), opts.record_output, true);
    let record_steps = grid.record_indices(opts.record_every);
    let mut next_record = 0;
    let mut dy = vec![0.0; n_diff];

    let mut rho = rho0.clone();
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
        let h = grid.step_len(step) / r as f64;
        for _ in 0..r {
            noise.draw(&mut rng, h);
            for (j, y) in dy.iter_mut().enumerate() {
                *y = noise.dw[j] + kernel.drift(rho.matrix(), j) * h;
            }
            rho = posterior_substep(&kernel, rho.matrix(), &noise, &dy, h, opts.scheme, |k| rec.jump(step, k))?;
            rec.add(&dy, Some(&noise.dw));
        }
        rec.end_step();
    }
    Ok(PosteriorTrajectory { grid: *grid, record_steps, state_path, entropy_path, output: rec.finish() })
}

fn normalize(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tr = a.trace().re;
    if !(tr > 0.0 && tr.is_finite()) {
        return Err(Error::ZeroTrace);
    }
    Ok(a.scale_real(1.0 / tr))
}

fn posterior_substep(
    kernel: &Kernel<'_>,
    rho: &ComplexMatrix,
    noise: &Noise,
    dy: &[f64],
    dt: f64,
    scheme: Scheme,
    mut on_jump: impl FnMut(usize),
) -> Result<QuantumState> {
    let channels = kernel.model.jump_channels();
    let lambda: Vec<f64> = (0..channels.len()).map(|k| kernel.intensity(rho, k)).collect();
    let fires = |k: usize| lambda[k] > INTENSITY_FLOOR && noise.u[k] < (lambda[k] * channels[k].weight * dt).min(1.0);
    let next = match scheme {
        Scheme::KrausEuler => {
            let op = kernel.kraus_step_operator(false, dy, dt);
            let mut s = normalize(&kernel.kraus_apply(&op, rho, dt))?;
            for (k, ch) in channels.iter().enumerate() {
                if fires(k) {
                    let out = ch.apply(&s);
                    if out.trace().re > INTENSITY_FLOOR {
                        s = normalize(&out)?;
                        on_jump(k);
                    }
                }
            }
            s
        }
        Scheme::EulerMaruyama => {
            let mut s = rho + &kernel.model.liouvillian(rho).scale_real(dt);
            for j in 0..kernel.n_diff() {
                let mut b = kernel.diffusion(rho, j);
                b.axpy(C64::new(-kernel.drift(rho, j), 0.0), rho);
                s.axpy(C64::new(noise.dw[j], 0.0), &b);
            }
            for (k, ch) in channels.iter().enumerate() {
                if lambda[k] <= INTENSITY_FLOOR {
                    continue;
                }
                let jumped = ch.apply(rho).scale_real(1.0 / lambda[k]);
                let diff = &jumped - rho;
                s.axpy(C64::new(-lambda[k] * ch.weight * dt, 0.0), &diff);
                if fires(k) {
                    s += &diff;
                    on_jump(k);
                }
            }
            s
        }
    };
    project_to_state(&next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::linalg::{matrix_exp, I};
    use crate::model::ModelBuilder;

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 1e-3).unwrap()
    }

    fn mixed_state() -> QuantumState {
        QuantumState::new(
            ComplexMatrix::from_rows(&[
                vec![C64::new(0.6, 0.0), C64::new(0.1, 0.2)],
                vec![C64::new(0.1, -0.2), C64::new(0.4, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identity_jumps_leave_linear_state_unchanged() {
        let m = ModelBuilder::new(2).jump_channel("id", 1.0, &[ComplexMatrix::identity(2)]).build().unwrap();
        let rho = mixed_state();
        for scheme in [Scheme::KrausEuler, Scheme::EulerMaruyama] {
            let opts = SimOptions { scheme, ..SimOptions::default() };
            let tr = simulate_linear_with(&m, &rho, &grid(), 4, &opts).unwrap();
            assert!(!tr.output.jump_events.is_empty());
            for s in &tr.sigma_path {
                assert!((s - rho.matrix()).hs_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_linear_evolution() {
        let m = ModelBuilder::new(2).hamiltonian(&sigma_z()).build().unwrap();
        let rho = mixed_state();
        let g = TimeGrid::new(1.0, 1e-4).unwrap();
        let tr = simulate_linear(&m, &rho, &g, 1).unwrap();
        let u = matrix_exp(&sigma_z().scale(-I));
        let expected = &(&u * rho.matrix()) * &u.adjoint();
        assert!((tr.sigma_path.last().unwrap() - &expected).hs_norm() < 1e-10);
        assert!(tr.weight_path.iter().all(|w| (w - 1.0).abs() < 1e-12));
    }

    #[test]
    fn identity_jumps_leave_posterior_state_unchanged() {
        let m = ModelBuilder::new(2).jump_channel("id", 1.0, &[ComplexMatrix::identity(2)]).build().unwrap();
        let rho = mixed_state();
        for scheme in [Scheme::KrausEuler, Scheme::EulerMaruyama] {
            let opts = SimOptions { scheme, ..SimOptions::default() };
            let tr = simulate_posterior_with(&m, &rho, &grid(), 4, &opts).unwrap();
            for s in &tr.state_path {
                assert!((s.matrix() - rho.matrix()).hs_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eigenstate_of_self_adjoint_measurement_is_fixed() {
        let m = ModelBuilder::new(2).diffusive(&sigma_z()).build().unwrap();
        let rho = QuantumState::basis(2, 0);
        for scheme in [Scheme::KrausEuler, Scheme::EulerMaruyama] {
            let opts = SimOptions { scheme, ..SimOptions::default() };
            let tr = simulate_posterior_with(&m, &rho, &grid(), 9, &opts).unwrap();
            for s in &tr.state_path {
                assert!((s.matrix() - rho.matrix()).hs_norm() < 1e-12);
            }
        }
    }

    #[test]
    fn posterior_is_deterministic() {
        let m = ModelBuilder::new(2)
            .hamiltonian(&sigma_x())
            .diffusive(&sigma_minus())
            .jump_channel("c", 0.5, &[sigma_minus()])
            .build()
            .unwrap();
        let rho = QuantumState::maximally_mixed(2);
        let a = simulate_posterior(&m, &rho, &grid(), 17).unwrap();
        let b = simulate_posterior(&m, &rho, &grid(), 17).unwrap();
        assert_eq!(a.state_path, b.state_path);
        assert_eq!(a.output.wiener_paths, b.output.wiener_paths);
        assert_eq!(a.output.jump_events, b.output.jump_events);
        let c = simulate_posterior(&m, &rho, &grid(), 18).unwrap();
        assert_ne!(a.state_path, c.state_path);
    }

    #[test]
    fn posterior_entropy_matches_states() {
        let m = ModelBuilder::new(2).hamiltonian(&sigma_x()).diffusive(&sigma_minus()).build().unwrap();
        let tr = simulate_posterior(&m, &QuantumState::maximally_mixed(2), &grid(), 2).unwrap();
        for (s, g) in tr.state_path.iter().zip(&tr.entropy_path) {
            assert_eq!(s.linear_entropy(), *g);
            assert!((0.0..1.0).contains(g));
        }
        assert_eq!(tr.output.wiener_paths[0].len(), grid().n_steps());
        assert_eq!(tr.output.compensated_wiener.as_ref().unwrap()[0].len(), grid().n_steps());
    }

    #[test]
    fn step_too_large_without_adaptivity() {
        let m = ModelBuilder::new(2).jump_channel("c", 50.0, &[sigma_minus()]).build().unwrap();
        let g = TimeGrid::new(1.0, 0.01).unwrap();
        let opts = SimOptions { adaptive: false, ..SimOptions::default() };
        let rho = QuantumState::basis(2, 0);
        assert!(matches!(simulate_posterior_with(&m, &rho, &g, 0, &opts), Err(Error::StepTooLarge(_))));
        assert!(simulate_posterior(&m, &rho, &g, 0).is_ok());
    }

    #[test]
    fn decay_counts_at_most_one_photon() {
        let m = ModelBuilder::new(2).jump_channel("c", 1.0, &[sigma_minus()]).build().unwrap();
        let g = TimeGrid::new(10.0, 1e-3).unwrap();
        for seed in 0..20 {
            let tr = simulate_posterior(&m, &QuantumState::basis(2, 0), &g, seed).unwrap();
            assert!(tr.output.jump_events.len() <= 1);
        }
    }

    #[test]
    fn linear_paths_stay_positive() {
        let m = ModelBuilder::new(2)
            .hamiltonian(&sigma_x())
            .diffusive(&sigma_minus())
            .diffusive(&sigma_minus().scale(I))
            .build()
            .unwrap();
        let opts = SimOptions { scheme: Scheme::EulerMaruyama, ..SimOptions::default() };
        let tr = simulate_linear_with(&m, &QuantumState::maximally_mixed(2), &grid(), 3, &opts).unwrap();
        for s in &tr.sigma_path {
            let min = crate::linalg::hermitian_eigen(s).last().unwrap().value;
            assert!(min >= -1e-8);
        }
        assert_eq!(tr.weight_path[0], 1.0);
    }
}
