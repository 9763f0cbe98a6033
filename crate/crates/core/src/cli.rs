//! Command-line front end: `simulate`, `master`, `equilibrium`, `check`,
//! `invariant` and `atom`. Exit status is 0 on success, 1 for usage and
//! validation errors and 2 for numerical failures.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{empirical_invariant_measure, ergodic_report, gell_mann_basis, lie_rank_check};
use crate::atom::{generate_atom_model, Detection, TwoLevelAtomSpec};
use crate::error::{Error, Result};
use crate::io::{self, Metadata};
use crate::linalg::{pauli, ComplexMatrix, PureStateVector, QuantumState, C64};
use crate::master::{equilibrium, evolve_master};
use crate::model::{
    build_model, check_ellipticity, check_pure_preserving, check_purification_obstruction_dim2, MeasurementModel,
    ModelConfig,
};
use crate::sde::{
    run_ensemble_with, simulate_linear_with, simulate_posterior_with, simulate_stratonovich_pure_with, EnsembleOptions,
    Mode, Scheme, SimOptions, TimeGrid,
};

#[derive(Debug, Parser)]
#[command(name = "qtraj", version, about = "Quantum trajectories under continual measurement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and an ensemble; writes trajectory.csv and ensemble.csv.
    Simulate(SimulateArgs),
    /// Integrate the master equation; writes master.csv.
    Master(MasterArgs),
    /// Stationary state of the master equation; writes equilibrium.csv.
    Equilibrium(EquilibriumArgs),
    /// Structural checks: pure-state preservation, purification obstruction,
    /// ellipticity and Lie rank.
    Check(CheckArgs),
    /// Long-run Bloch histogram and ergodic report; writes histogram.csv and ergodic.txt.
    Invariant(InvariantArgs),
    /// Write the model file of a driven two-level atom.
    Atom(AtomArgs),
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub trajectories: usize,
    #[arg(long)]
    pub seed: u64,
    /// linear | posterior | stratonovich
    #[arg(long, default_value = "posterior")]
    pub mode: String,
    /// kraus-euler | euler-maruyama
    #[arg(long, default_value = "kraus-euler")]
    pub scheme: String,
    /// basis:K | maximally-mixed | pure:RE,IM;RE,IM;...
    #[arg(long, default_value = "basis:0")]
    pub initial: String,
    /// Record every k-th grid point.
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Output directory.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct MasterArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub t_final: f64,
    /// Spacing of the output times.
    #[arg(long, default_value_t = 1e-2)]
    pub dt: f64,
    #[arg(long, default_value = "basis:0")]
    pub initial: String,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EquilibriumArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub model: ModelArg,
    /// Seeds the random probe states.
    #[arg(long)]
    pub seed: u64,
    /// Number of Haar-random pure states for the ellipticity scan.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Bracket depth of the Lie-rank check.
    #[arg(long, default_value_t = 2)]
    pub lie_depth: usize,
    /// Optional output directory for check.txt.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InvariantArgs {
    #[command(flatten)]
    pub model: ModelArg,
    #[arg(long)]
    pub t_final: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub burn_in: f64,
    #[arg(long, default_value_t = 12)]
    pub bins_polar: usize,
    #[arg(long, default_value_t = 24)]
    pub bins_azimuth: usize,
    #[arg(long, default_value = "kraus-euler")]
    pub scheme: String,
    #[arg(long, default_value = "basis:0")]
    pub initial: String,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct AtomArgs {
    /// heterodyne | homodyne | direct
    #[arg(long)]
    pub detection: String,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub delta_omega: f64,
    /// Component `RE,IM` of α; repeat once per component.
    #[arg(long, required = true, value_parser = parse_complex, allow_hyphen_values = true)]
    pub alpha: Vec<C64>,
    /// `⟨α|λ⟩` as `RE,IM`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    pub lambda_inner: C64,
    /// Local-oscillator phase (homodyne).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi: f64,
    /// Model file to write.
    #[arg(long)]
    pub output: PathBuf,
}

fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got '{s}'"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part '{re}': {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part '{im}': {e}"))?;
    Ok(C64::new(re, im))
}

/// `basis:K`, `maximally-mixed` or `pure:RE,IM;RE,IM;…` (normalized).
pub fn parse_initial(spec: &str, dim: usize) -> Result<QuantumState> {
    if spec == "maximally-mixed" {
        return Ok(QuantumState::maximally_mixed(dim));
    }
    if let Some(k) = spec.strip_prefix("basis:") {
        let k: usize = k.parse().map_err(|_| Error::InvalidArgument(format!("--initial: bad basis index '{k}'")))?;
        if k >= dim {
            return Err(Error::InvalidArgument(format!("--initial: basis index {k} out of range for dimension {dim}")));
        }
        return Ok(QuantumState::basis(dim, k));
    }
    if let Some(amps) = spec.strip_prefix("pure:") {
        let amps = amps
            .split(';')
            .map(|a| parse_complex(a).map_err(|e| Error::InvalidArgument(format!("--initial: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: amps.len() });
        }
        return Ok(PureStateVector::normalized(amps)?.projector());
    }
    Err(Error::InvalidArgument(format!("--initial: expected basis:K, maximally-mixed or pure:..., got '{spec}'")))
}

pub fn load_model(path: &Path) -> Result<MeasurementModel> {
    build_model(&ModelConfig::load(path)?)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = File::create(&path)?;
    Ok((path, BufWriter::new(file)))
}

fn finish(path: PathBuf, mut w: BufWriter<File>) -> Result<()> {
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let debug = format!("{e:?}");
            let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error");
            eprintln!("error ({kind}): {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a),
        Command::Master(a) => master(&a),
        Command::Equilibrium(a) => equilibrium_cmd(&a),
        Command::Check(a) => check(&a),
        Command::Invariant(a) => invariant(&a),
        Command::Atom(a) => atom(&a),
    }
}

fn sim_options(scheme: &str, record_every: usize) -> Result<SimOptions> {
    if record_every == 0 {
        return Err(Error::InvalidArgument("--record-every must be at least 1".into()));
    }
    Ok(SimOptions { scheme: scheme.parse::<Scheme>()?, record_every, ..SimOptions::default() })
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let m = load_model(&a.model.model)?;
    let mode: Mode = a.mode.parse()?;
    let grid = TimeGrid::new(a.t_final, a.dt)?;
    let rho0 = parse_initial(&a.initial, m.dim())?;
    let sim = sim_options(&a.scheme, a.record_every)?;
    let mut meta = Metadata::new("simulate", &m.content_hash())
        .with("mode", mode.name())
        .with("t_final", io::fmt_f64(a.t_final))
        .with("initial", &a.initial)
        .with("record_every", a.record_every);
    meta.seed = Some(a.seed);
    meta.scheme = Some(sim.scheme.name().to_string());
    meta.dt = Some(a.dt);
    let (n_diff, n_jump) = (m.diffusive_ops().len(), m.jump_channels().len());

    let (path, mut w) = create(&a.output, "trajectory.csv")?;
    let traj_meta = meta.clone().with("trajectory", 0);
    match mode {
        Mode::Linear => {
            let t = simulate_linear_with(&m, &rho0, &grid, a.seed, &sim)?;
            io::write_linear_trajectory(&mut w, &traj_meta, &t, n_diff, n_jump)?;
        }
        Mode::Posterior => {
            let t = simulate_posterior_with(&m, &rho0, &grid, a.seed, &sim)?;
            io::write_posterior_trajectory(&mut w, &traj_meta, &t, n_diff, n_jump)?;
        }
        Mode::Stratonovich => {
            if !rho0.is_pure() {
                return Err(Error::InvalidState("the Stratonovich scheme needs a pure initial state".into()));
            }
            let t = simulate_stratonovich_pure_with(&m, &rho0.dominant_vector(), &grid, a.seed, &sim)?;
            io::write_posterior_trajectory(&mut w, &traj_meta, &t, n_diff, n_jump)?;
        }
    }
    finish(path, w)?;

    let opts = EnsembleOptions { sim: SimOptions { record_output: false, ..sim }, observables: vec![] };
    let stats = run_ensemble_with(&m, &rho0, &grid, a.trajectories, a.seed, mode, &opts)?;
    let (path, mut w) = create(&a.output, "ensemble.csv")?;
    io::write_ensemble(&mut w, &meta, &stats)?;
    finish(path, w)
}

fn master(a: &MasterArgs) -> Result<()> {
    let m = load_model(&a.model.model)?;
    let grid = TimeGrid::new(a.t_final, a.dt)?;
    let rho0 = parse_initial(&a.initial, m.dim())?;
    let times: Vec<f64> = (0..=grid.n_steps()).map(|i| grid.time(i)).collect();
    let path_states = evolve_master(&m, &rho0, &times)?;
    let mut meta =
        Metadata::new("master", &m.content_hash()).with("t_final", io::fmt_f64(a.t_final)).with("initial", &a.initial);
    meta.dt = Some(a.dt);
    let (path, mut w) = create(&a.output, "master.csv")?;
    io::write_state_path(&mut w, &meta, &times, &path_states)?;
    finish(path, w)
}

fn equilibrium_cmd(a: &EquilibriumArgs) -> Result<()> {
    let m = load_model(&a.model.model)?;
    let eta = equilibrium(&m)?;
    let meta = Metadata::new("equilibrium", &m.content_hash());
    let (path, mut w) = create(&a.output, "equilibrium.csv")?;
    io::write_state_path(&mut w, &meta, &[f64::INFINITY], &[eta])?;
    finish(path, w)
}

/// Renders the structural checks as `key=value` lines.
pub fn check_report(m: &MeasurementModel, seed: u64, samples: usize, lie_depth: usize) -> Result<String> {
    let mut out = String::new();
    let n = m.dim();
    let pp = check_pure_preserving(m, samples.max(1), seed)?;
    writeln!(out, "pure_preserving={}", pp.verdict).unwrap();
    writeln!(out, "pure_preserving.dissipation_present={}", pp.dissipation_present).unwrap();
    writeln!(out, "pure_preserving.probes={}", pp.probes_checked).unwrap();
    writeln!(out, "pure_preserving.witnesses={}", pp.witnesses.len()).unwrap();
    for (k, note) in pp.assumptions.iter().enumerate() {
        writeln!(out, "pure_preserving.assumption_{k}={note}").unwrap();
    }

    if n == 2 {
        let ob = check_purification_obstruction_dim2(m)?;
        writeln!(out, "obstruction={}", ob.obstruction_exists).unwrap();
        for (k, note) in ob.skipped.iter().enumerate() {
            writeln!(out, "obstruction.skipped_{k}={note}").unwrap();
        }
    } else {
        writeln!(out, "obstruction=skipped (dimension {n})").unwrap();
    }

    if m.diffusive_ops().is_empty() {
        writeln!(out, "ellipticity=skipped (no diffusive channels)").unwrap();
        writeln!(out, "lie_rank=skipped (no diffusive channels)").unwrap();
        return Ok(out);
    }
    // Candidate exceptional points: the computational basis states plus any
    // random probe at which ellipticity fails.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elliptic_count = 0;
    let mut failures: Vec<PureStateVector> = Vec::new();
    for _ in 0..samples {
        let psi = PureStateVector::haar(n, &mut rng);
        if check_ellipticity(m, &psi)?.elliptic {
            elliptic_count += 1;
        } else {
            failures.push(psi);
        }
    }
    writeln!(out, "ellipticity.random_samples={samples}").unwrap();
    writeln!(out, "ellipticity.random_elliptic={elliptic_count}").unwrap();
    let mut points: Vec<(String, PureStateVector)> =
        (0..n).map(|k| (format!("basis_{k}"), PureStateVector::basis(n, k))).collect();
    points.extend(failures.into_iter().enumerate().map(|(i, psi)| (format!("random_failure_{i}"), psi)));
    for (name, psi) in &points {
        let e = check_ellipticity(m, psi)?;
        let min_sv = e.singular_values.last().copied().unwrap_or(0.0);
        writeln!(out, "ellipticity.{name}={} min_singular_value={}", e.elliptic, io::fmt_f64(min_sv)).unwrap();
    }
    for (name, psi) in &points {
        let r = lie_rank_check(m, psi, lie_depth)?;
        writeln!(out, "lie_rank.{name}={} full={} target={}", r.rank, r.full, 2 * (n - 1)).unwrap();
    }
    Ok(out)
}

fn check(a: &CheckArgs) -> Result<()> {
    let m = load_model(&a.model.model)?;
    let report = check_report(&m, a.seed, a.samples, a.lie_depth)?;
    print!("{report}");
    if let Some(dir) = &a.output {
        let mut meta =
            Metadata::new("check", &m.content_hash()).with("samples", a.samples).with("lie_depth", a.lie_depth);
        meta.seed = Some(a.seed);
        let (path, mut w) = create(dir, "check.txt")?;
        writeln!(w, "{}", meta.header_line())?;
        w.write_all(report.as_bytes())?;
        finish(path, w)?;
    }
    Ok(())
}

/// Named observables for the variance decomposition: the Pauli matrices in
/// dimension 2, the orthonormal traceless basis otherwise.
fn report_observables(n: usize) -> Vec<(String, ComplexMatrix)> {
    if n == 2 {
        vec![
            ("sigma_x".into(), pauli::sigma_x()),
            ("sigma_y".into(), pauli::sigma_y()),
            ("sigma_z".into(), pauli::sigma_z()),
        ]
    } else {
        gell_mann_basis(n).into_iter().enumerate().map(|(k, e)| (format!("e{k}"), e)).collect()
    }
}

fn invariant(a: &InvariantArgs) -> Result<()> {
    let m = load_model(&a.model.model)?;
    let grid = TimeGrid::new(a.t_final, a.dt)?;
    let rho0 = parse_initial(&a.initial, m.dim())?;
    let sim = SimOptions { record_output: false, ..sim_options(&a.scheme, a.record_every)? };
    let eta = equilibrium(&m)?;
    let traj = simulate_posterior_with(&m, &rho0, &grid, a.seed, &sim)?;
    let mut meta = Metadata::new("invariant", &m.content_hash())
        .with("t_final", io::fmt_f64(a.t_final))
        .with("burn_in", io::fmt_f64(a.burn_in))
        .with("initial", &a.initial)
        .with("record_every", a.record_every);
    meta.seed = Some(a.seed);
    meta.scheme = Some(sim.scheme.name().to_string());
    meta.dt = Some(a.dt);

    if m.dim() == 2 {
        let hist = empirical_invariant_measure(&traj, (a.bins_polar, a.bins_azimuth), a.burn_in)?;
        let hist_meta = meta.clone().with("bins", format!("{}x{}", a.bins_polar, a.bins_azimuth));
        let (path, mut w) = create(&a.output, "histogram.csv")?;
        io::write_histogram(&mut w, &hist_meta, &hist)?;
        finish(path, w)?;
        println!("occupied_bins={} of {}", hist.occupied_bins(), a.bins_polar * a.bins_azimuth);
    } else {
        log::warn!("Bloch histogram needs dimension 2; skipping histogram.csv");
    }

    let report = ergodic_report(&traj, &eta, a.burn_in, &report_observables(m.dim()))?;
    let (path, mut w) = create(&a.output, "ergodic.txt")?;
    io::write_ergodic_report(&mut w, &meta, &report)?;
    finish(path, w)?;
    println!("distance={}", io::fmt_f64(report.distance));
    Ok(())
}

fn atom(a: &AtomArgs) -> Result<()> {
    let spec = TwoLevelAtomSpec {
        delta_omega: a.delta_omega,
        alpha: a.alpha.clone(),
        lambda_inner: a.lambda_inner,
        detection: a.detection.parse::<Detection>()?,
        phi: a.phi,
    };
    let m = generate_atom_model(&spec)?;
    if let Some(dir) = a.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    m.config().save(&a.output)?;
    println!("wrote {} (model_hash={})", a.output.display(), m.content_hash());
    Ok(())
}
