//! Monte-Carlo ensembles with streaming, order-deterministic aggregation.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::TimeGrid;
use super::stratonovich::simulate_stratonovich_pure_with;
use super::trajectory::{simulate_linear_with, simulate_posterior_with, OutputRecord, SimOptions};
use crate::error::{Error, Result};
use crate::linalg::{hs_inner, ComplexMatrix, QuantumState, C64};
use crate::model::MeasurementModel;

/// Which equation generates the trajectories.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Linear equation under the reference law, averages weighted by `Tr σ_t`.
    Linear,
    /// Nonlinear equation under the physical law, unweighted averages.
    Posterior,
    /// Pure-state Stratonovich scheme under the physical law.
    Stratonovich,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Linear => "linear",
            Mode::Posterior => "posterior",
            Mode::Stratonovich => "stratonovich",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "posterior" => Ok(Self::Posterior),
            "stratonovich" => Ok(Self::Stratonovich),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EnsembleOptions {
    pub sim: SimOptions,
    /// Observables `a` whose expectations `⟨a, ρ_t⟩` are tracked with their
    /// own standard errors.
    pub observables: Vec<ComplexMatrix>,
}

/// Welford mean and variance.
#[derive(Clone, Copy, Debug, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n > 1 {
            self.m2 / (self.n - 1) as f64
        } else {
            0.0
        }
    }

    fn std_error(&self) -> f64 {
        if self.n > 0 {
            (self.variance() / self.n as f64).sqrt()
        } else {
            0.0
        }
    }
}

/// Recorded values of one trajectory: at each time the (weighted) state,
/// weight, weighted entropy and weighted observables; jump counts and
/// innovation moments over the whole run.
struct Sample {
    states: Vec<ComplexMatrix>,
    weights: Vec<f64>,
    entropies: Vec<f64>,
    observables: Vec<Vec<f64>>,
    jumps: Vec<f64>,
    innovation: Vec<(f64, f64, usize)>,
}

/// Per-time aggregates over an ensemble. In linear mode every quantity is
/// the reference-law mean of the weighted value, which equals the
/// physical-law mean of the normalized value.
#[derive(Clone, Debug)]
pub struct EnsembleStats {
    pub mode: Mode,
    pub n_traj: usize,
    pub n_failed: usize,
    /// Trajectory index and message of each failure.
    pub failures: Vec<(usize, String)>,
    pub times: Vec<f64>,
    pub mean_state: Vec<ComplexMatrix>,
    pub state_se_re: Vec<DMatrix<f64>>,
    pub state_se_im: Vec<DMatrix<f64>>,
    pub mean_weight: Vec<f64>,
    pub weight_se: Vec<f64>,
    /// Mean linear entropy `G(t)`.
    pub mean_entropy: Vec<f64>,
    pub entropy_se: Vec<f64>,
    /// `[observable][time]`
    pub observable_mean: Vec<Vec<f64>>,
    pub observable_se: Vec<Vec<f64>>,
    /// Jump counts over the whole run, per channel.
    pub jump_count_mean: Vec<f64>,
    pub jump_count_se: Vec<f64>,
    /// Pooled sample mean and variance of the innovation increments, per
    /// diffusive channel (physical-law modes only).
    pub innovation_mean: Vec<f64>,
    pub innovation_var: Vec<f64>,
}

impl EnsembleStats {
    pub fn n_ok(&self) -> usize {
        self.n_traj - self.n_failed
    }
}

/// Thread budget from `QTRAJ_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("QTRAJ_THREADS").ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

fn observe(observables: &[ComplexMatrix], states: &[ComplexMatrix]) -> Result<Vec<Vec<f64>>> {
    observables.iter().map(|a| states.iter().map(|s| hs_inner(a, s).map(|z| z.re)).collect()).collect()
}

fn counts(output: &OutputRecord, n_channels: usize) -> Vec<f64> {
    output.jump_counts(n_channels).into_iter().map(|c| c as f64).collect()
}

fn run_one(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    seed: u64,
    mode: Mode,
    opts: &EnsembleOptions,
) -> Result<Sample> {
    let n_jump = m.jump_channels().len();
    if mode == Mode::Linear {
        let tr = simulate_linear_with(m, rho0, grid, seed, &opts.sim)?;
        // w·g(σ/w) = w − Tr σ²/w
        let entropies = tr
            .sigma_path
            .iter()
            .zip(&tr.weight_path)
            .map(|(s, &w)| (w - s.inner().iter().map(|z| z.norm_sqr()).sum::<f64>() / w).max(0.0))
            .collect();
        return Ok(Sample {
            observables: observe(&opts.observables, &tr.sigma_path)?,
            jumps: counts(&tr.output, n_jump),
            innovation: Vec::new(),
            entropies,
            weights: tr.weight_path,
            states: tr.sigma_path,
        });
    }
    let tr = match mode {
        Mode::Posterior => simulate_posterior_with(m, rho0, grid, seed, &opts.sim)?,
        _ => {
            if !rho0.is_pure() {
                return Err(Error::InvalidState("the Stratonovich scheme needs a pure initial state".into()));
            }
            simulate_stratonovich_pure_with(m, &rho0.dominant_vector(), grid, seed, &opts.sim)?
        }
    };
    let states: Vec<ComplexMatrix> = tr.state_path.into_iter().map(QuantumState::into_matrix).collect();
    Ok(Sample {
        observables: observe(&opts.observables, &states)?,
        weights: vec![1.0; states.len()],
        jumps: counts(&tr.output, n_jump),
        innovation: tr.output.innovation_moments,
        entropies: tr.entropy_path,
        states,
    })
}

struct Accumulator {
    re: Vec<Vec<Welford>>,
    im: Vec<Vec<Welford>>,
    weight: Vec<Welford>,
    entropy: Vec<Welford>,
    observables: Vec<Vec<Welford>>,
    jumps: Vec<Welford>,
    innovation: Vec<(f64, f64, usize)>,
}

impl Accumulator {
    fn new(n_times: usize, n: usize, n_obs: usize, n_jump: usize, n_diff: usize) -> Self {
        Self {
            re: vec![vec![Welford::default(); n * n]; n_times],
            im: vec![vec![Welford::default(); n * n]; n_times],
            weight: vec![Welford::default(); n_times],
            entropy: vec![Welford::default(); n_times],
            observables: vec![vec![Welford::default(); n_times]; n_obs],
            jumps: vec![Welford::default(); n_jump],
            innovation: vec![(0.0, 0.0, 0); n_diff],
        }
    }

    fn push(&mut self, s: &Sample) {
        for (t, state) in s.states.iter().enumerate() {
            for (idx, z) in state.inner().iter().enumerate() {
                self.re[t][idx].push(z.re);
                self.im[t][idx].push(z.im);
            }
            self.weight[t].push(s.weights[t]);
            self.entropy[t].push(s.entropies[t]);
        }
        for (acc, vals) in self.observables.iter_mut().zip(&s.observables) {
            for (w, v) in acc.iter_mut().zip(vals) {
                w.push(*v);
            }
        }
        for (w, c) in self.jumps.iter_mut().zip(&s.jumps) {
            w.push(*c);
        }
        for (acc, m) in self.innovation.iter_mut().zip(&s.innovation) {
            acc.0 += m.0;
            acc.1 += m.1;
            acc.2 += m.2;
        }
    }
}

pub fn run_ensemble(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    n_traj: usize,
    seed: u64,
    mode: Mode,
) -> Result<EnsembleStats> {
    run_ensemble_with(m, rho0, grid, n_traj, seed, mode, &EnsembleOptions::default())
}

/// Runs `n_traj` trajectories with seeds `seed, seed+1, …`, in parallel, and
/// folds them in index order so the result does not depend on scheduling.
/// Failed trajectories are counted; the run aborts when more than 1% fail.
pub fn run_ensemble_with(
    m: &MeasurementModel,
    rho0: &QuantumState,
    grid: &TimeGrid,
    n_traj: usize,
    seed: u64,
    mode: Mode,
    opts: &EnsembleOptions,
) -> Result<EnsembleStats> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("ensemble needs at least one trajectory".into()));
    }
    if rho0.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho0.dim() });
    }
    for a in &opts.observables {
        if a.dim() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: a.dim() });
        }
    }
    let record_steps = grid.record_indices(opts.sim.record_every);
    let times: Vec<f64> = record_steps.iter().map(|&i| grid.time(i)).collect();
    let n = m.dim();
    let n_diff = if mode == Mode::Linear { 0 } else { m.diffusive_ops().len() };
    let mut acc = Accumulator::new(times.len(), n, opts.observables.len(), m.jump_channels().len(), n_diff);
    let mut failures = Vec::new();

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(k) = thread_cap() {
            b = b.num_threads(k);
        }
        b.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
    };
    let chunk = (pool.current_num_threads() * 8).max(8);
    let mut start = 0;
    while start < n_traj {
        let end = (start + chunk).min(n_traj);
        let results: Vec<Result<Sample>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| run_one(m, rho0, grid, seed.wrapping_add(i as u64), mode, opts))
                .collect()
        });
        for (offset, r) in results.into_iter().enumerate() {
            match r {
                Ok(s) => acc.push(&s),
                Err(e) => failures.push((start + offset, e.to_string())),
            }
        }
        if failures.len() * 100 > n_traj {
            return Err(Error::EnsembleAborted { failed: failures.len(), total: n_traj, first: failures[0].1.clone() });
        }
        start = end;
    }
    if failures.len() == n_traj {
        return Err(Error::EnsembleAborted { failed: n_traj, total: n_traj, first: failures[0].1.clone() });
    }

    let to_matrix = |ws: &[Welford], f: &dyn Fn(&Welford) -> f64| DMatrix::from_iterator(n, n, ws.iter().map(f));
    let mean_state = acc
        .re
        .iter()
        .zip(&acc.im)
        .map(|(re, im)| {
            let m = DMatrix::from_iterator(n, n, re.iter().zip(im).map(|(a, b)| C64::new(a.mean, b.mean)));
            ComplexMatrix::try_from_dmatrix(m).expect("square")
        })
        .collect();
    let summarize = |ws: &[Welford]| -> (Vec<f64>, Vec<f64>) {
        (ws.iter().map(|w| w.mean).collect(), ws.iter().map(Welford::std_error).collect())
    };
    let (mean_weight, weight_se) = summarize(&acc.weight);
    let (mean_entropy, entropy_se) = summarize(&acc.entropy);
    let (jump_count_mean, jump_count_se) = summarize(&acc.jumps);
    let (observable_mean, observable_se) = acc.observables.iter().map(|ws| summarize(ws)).unzip();
    let (innovation_mean, innovation_var) = acc
        .innovation
        .iter()
        .map(|&(s, s2, k)| {
            if k == 0 {
                return (0.0, 0.0);
            }
            let mean = s / k as f64;
            let var = if k > 1 { (s2 - k as f64 * mean * mean) / (k - 1) as f64 } else { 0.0 };
            (mean, var)
        })
        .unzip();

    Ok(EnsembleStats {
        mode,
        n_traj,
        n_failed: failures.len(),
        failures,
        times,
        state_se_re: acc.re.iter().map(|ws| to_matrix(ws, &Welford::std_error)).collect(),
        state_se_im: acc.im.iter().map(|ws| to_matrix(ws, &Welford::std_error)).collect(),
        mean_state,
        mean_weight,
        weight_se,
        mean_entropy,
        entropy_se,
        observable_mean,
        observable_se,
        jump_count_mean,
        jump_count_se,
        innovation_mean,
        innovation_var,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::model::ModelBuilder;
    use crate::sde::simulate_posterior_with;

    fn model() -> MeasurementModel {
        ModelBuilder::new(2)
            .hamiltonian(&sigma_x())
            .diffusive(&sigma_minus())
            .jump_channel("c", 0.5, &[sigma_minus()])
            .build()
            .unwrap()
    }

    #[test]
    fn single_trajectory_stats_equal_its_values() {
        let m = model();
        let g = TimeGrid::new(0.5, 1e-3).unwrap();
        let rho = QuantumState::maximally_mixed(2);
        let opts = EnsembleOptions {
            sim: SimOptions { record_every: 50, ..SimOptions::default() },
            observables: vec![sigma_z()],
        };
        let stats = run_ensemble_with(&m, &rho, &g, 1, 42, Mode::Posterior, &opts).unwrap();
        let tr = simulate_posterior_with(&m, &rho, &g, 42, &opts.sim).unwrap();
        assert_eq!(stats.times.len(), tr.state_path.len());
        for (a, b) in stats.mean_state.iter().zip(&tr.state_path) {
            assert_eq!(a, b.matrix());
        }
        assert_eq!(stats.mean_entropy, tr.entropy_path);
        assert!(stats.entropy_se.iter().all(|&s| s == 0.0));
        assert_eq!(stats.jump_count_mean[0], tr.output.jump_events.len() as f64);
    }

    #[test]
    fn ensemble_is_deterministic() {
        let m = model();
        let g = TimeGrid::new(0.2, 1e-3).unwrap();
        let rho = QuantumState::maximally_mixed(2);
        for mode in [Mode::Linear, Mode::Posterior] {
            let a = run_ensemble(&m, &rho, &g, 20, 5, mode).unwrap();
            let b = run_ensemble(&m, &rho, &g, 20, 5, mode).unwrap();
            assert_eq!(a.mean_state, b.mean_state);
            assert_eq!(a.mean_weight, b.mean_weight);
        }
    }

    #[test]
    fn posterior_weights_are_one() {
        let m = model();
        let g = TimeGrid::new(0.1, 1e-3).unwrap();
        let stats = run_ensemble(&m, &QuantumState::maximally_mixed(2), &g, 4, 0, Mode::Posterior).unwrap();
        assert!(stats.mean_weight.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn stratonovich_needs_pure_start() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).build().unwrap();
        let g = TimeGrid::new(0.1, 1e-2).unwrap();
        let r = run_ensemble(&m, &QuantumState::maximally_mixed(2), &g, 2, 0, Mode::Stratonovich);
        assert!(matches!(r, Err(Error::EnsembleAborted { .. })));
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in [Mode::Linear, Mode::Posterior, Mode::Stratonovich] {
            assert_eq!(mode.name().parse::<Mode>().unwrap(), mode);
        }
    }
}
