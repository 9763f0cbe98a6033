//! CSV and key-value writers. Every file starts with one `#` metadata line;
//! numbers are written in scientific notation with 17 significant digits so
//! that identical runs produce byte-identical files.

use std::io::Write;

use crate::analysis::{BlochHistogram, ErgodicReport};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, QuantumState};
use crate::sde::{EnsembleStats, LinearTrajectory, PosteriorTrajectory, RNG_NAME};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Full-precision float formatting shared by every writer.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Everything needed to reproduce the run that produced a file.
#[derive(Clone, Debug, Default)]
pub struct Metadata {
    pub command: String,
    pub model_hash: String,
    pub seed: Option<u64>,
    pub scheme: Option<String>,
    pub dt: Option<f64>,
    /// Further `key=value` pairs in order (mode, t_final, initial state, ...).
    pub extra: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, model_hash: &str) -> Self {
        Self { command: command.into(), model_hash: model_hash.into(), ..Self::default() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.extra.push((key.into(), value.to_string()));
        self
    }

    /// `# qtraj version=… command=… model_hash=… seed=… scheme=… dt=… rng=… k=v…`
    pub fn header_line(&self) -> String {
        let mut s = format!("# qtraj version={VERSION} command={} model_hash={}", self.command, self.model_hash);
        if let Some(seed) = self.seed {
            s += &format!(" seed={seed} rng={RNG_NAME}");
        }
        if let Some(scheme) = &self.scheme {
            s += &format!(" scheme={scheme}");
        }
        if let Some(dt) = self.dt {
            s += &format!(" dt={}", fmt_f64(dt));
        }
        for (k, v) in &self.extra {
            s += &format!(" {k}={v}");
        }
        s
    }
}

/// Column names for a row-major flattened `n×n` matrix.
fn state_columns(prefix: &str, n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n * n);
    for part in ["re", "im"] {
        for i in 0..n {
            for j in 0..n {
                cols.push(format!("{prefix}{part}_{i}_{j}"));
            }
        }
    }
    cols
}

fn push_matrix(row: &mut Vec<String>, m: &ComplexMatrix) {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            row.push(fmt_f64(m.get(i, j).re));
        }
    }
    for i in 0..n {
        for j in 0..n {
            row.push(fmt_f64(m.get(i, j).im));
        }
    }
}

fn write_row<W: Write>(w: &mut W, row: &[String]) -> Result<()> {
    writeln!(w, "{}", row.join(","))?;
    Ok(())
}

fn output_columns(n_diff: usize, n_jump: usize) -> Vec<String> {
    (0..n_diff).map(|j| format!("output_{j}")).chain((0..n_jump).map(|k| format!("count_{k}"))).collect()
}

/// Columns `t, re_i_j…, im_i_j…, weight, entropy, output_j…, count_k…`;
/// the state is the unnormalized `σ_t` and the entropy is that of `σ_t/Tr σ_t`.
pub fn write_linear_trajectory<W: Write>(
    w: &mut W,
    meta: &Metadata,
    traj: &LinearTrajectory,
    n_diff: usize,
    n_jump: usize,
) -> Result<()> {
    let n = traj.sigma_path.first().map_or(0, ComplexMatrix::dim);
    writeln!(w, "{}", meta.header_line())?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("", n));
    header.extend(["weight".into(), "entropy".into()]);
    header.extend(output_columns(n_diff, n_jump));
    write_row(w, &header)?;
    for (k, t) in traj.times().into_iter().enumerate() {
        let sigma = &traj.sigma_path[k];
        let weight = traj.weight_path[k];
        let purity = (sigma * sigma).trace().re / (weight * weight);
        let mut row = vec![fmt_f64(t)];
        push_matrix(&mut row, sigma);
        row.push(fmt_f64(weight));
        row.push(fmt_f64(1.0 - purity));
        if let Some(c) = traj.output.cumulative.get(k) {
            row.extend(c.iter().map(|&x| fmt_f64(x)));
        }
        write_row(w, &row)?;
    }
    Ok(())
}

/// Same layout as [`write_linear_trajectory`] with weight 1.
pub fn write_posterior_trajectory<W: Write>(
    w: &mut W,
    meta: &Metadata,
    traj: &PosteriorTrajectory,
    n_diff: usize,
    n_jump: usize,
) -> Result<()> {
    let n = traj.state_path.first().map_or(0, QuantumState::dim);
    writeln!(w, "{}", meta.header_line())?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("", n));
    header.extend(["weight".into(), "entropy".into()]);
    header.extend(output_columns(n_diff, n_jump));
    write_row(w, &header)?;
    for (k, t) in traj.times().into_iter().enumerate() {
        let mut row = vec![fmt_f64(t)];
        push_matrix(&mut row, traj.state_path[k].matrix());
        row.push(fmt_f64(1.0));
        row.push(fmt_f64(traj.entropy_path[k]));
        if let Some(c) = traj.output.cumulative.get(k) {
            row.extend(c.iter().map(|&x| fmt_f64(x)));
        }
        write_row(w, &row)?;
    }
    Ok(())
}

/// A path of states (master equation, equilibrium) in the trajectory
/// layout: weight is the trace, there are no output columns.
pub fn write_state_path<W: Write>(w: &mut W, meta: &Metadata, times: &[f64], states: &[QuantumState]) -> Result<()> {
    let n = states.first().map_or(0, QuantumState::dim);
    writeln!(w, "{}", meta.header_line())?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("", n));
    header.extend(["weight".into(), "entropy".into()]);
    write_row(w, &header)?;
    for (t, rho) in times.iter().zip(states) {
        let mut row = vec![fmt_f64(*t)];
        push_matrix(&mut row, rho.matrix());
        row.push(fmt_f64(rho.matrix().trace().re));
        row.push(fmt_f64(rho.linear_entropy()));
        write_row(w, &row)?;
    }
    Ok(())
}

/// Columns `t`, mean state, its componentwise standard errors, weight and
/// entropy means with standard errors, then `obs_k` / `obs_k_se` pairs.
/// Run-level jump counts and innovation moments go into the header.
pub fn write_ensemble<W: Write>(w: &mut W, meta: &Metadata, stats: &EnsembleStats) -> Result<()> {
    let n = stats.mean_state.first().map_or(0, ComplexMatrix::dim);
    let mut meta = meta.clone();
    meta.extra.push(("n_traj".into(), stats.n_traj.to_string()));
    meta.extra.push(("n_failed".into(), stats.n_failed.to_string()));
    let join = |v: &[f64]| v.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(";");
    if !stats.jump_count_mean.is_empty() {
        meta.extra.push(("jump_count_mean".into(), join(&stats.jump_count_mean)));
        meta.extra.push(("jump_count_se".into(), join(&stats.jump_count_se)));
    }
    if !stats.innovation_mean.is_empty() {
        meta.extra.push(("innovation_mean".into(), join(&stats.innovation_mean)));
        meta.extra.push(("innovation_var".into(), join(&stats.innovation_var)));
    }
    writeln!(w, "{}", meta.header_line())?;
    let mut header = vec!["t".to_string()];
    header.extend(state_columns("", n));
    header.extend(state_columns("se_", n));
    header.extend(["weight".into(), "weight_se".into(), "entropy".into(), "entropy_se".into()]);
    for k in 0..stats.observable_mean.len() {
        header.push(format!("obs_{k}"));
        header.push(format!("obs_{k}_se"));
    }
    write_row(w, &header)?;
    for (k, t) in stats.times.iter().enumerate() {
        let mut row = vec![fmt_f64(*t)];
        push_matrix(&mut row, &stats.mean_state[k]);
        for se in [&stats.state_se_re[k], &stats.state_se_im[k]] {
            for i in 0..n {
                for j in 0..n {
                    row.push(fmt_f64(se[(i, j)]));
                }
            }
        }
        row.push(fmt_f64(stats.mean_weight[k]));
        row.push(fmt_f64(stats.weight_se[k]));
        row.push(fmt_f64(stats.mean_entropy[k]));
        row.push(fmt_f64(stats.entropy_se[k]));
        for (mean, se) in stats.observable_mean.iter().zip(&stats.observable_se) {
            row.push(fmt_f64(mean[k]));
            row.push(fmt_f64(se[k]));
        }
        write_row(w, &row)?;
    }
    Ok(())
}

/// One row per cell: `theta_index, phi_index, dwell_time, count`.
pub fn write_histogram<W: Write>(w: &mut W, meta: &Metadata, hist: &BlochHistogram) -> Result<()> {
    let meta = meta.clone().with("total_samples", hist.total).with("mixed_samples", hist.mixed_samples);
    writeln!(w, "{}", meta.header_line())?;
    writeln!(w, "theta_index,phi_index,dwell_time,count")?;
    for i in 0..hist.n_polar {
        for j in 0..hist.n_azimuth {
            writeln!(w, "{i},{j},{},{}", fmt_f64(hist.dwell_time[i][j]), hist.counts[i][j])?;
        }
    }
    Ok(())
}

fn matrix_entries(prefix: &str, m: &ComplexMatrix) -> Vec<(String, f64)> {
    let n = m.dim();
    let mut out = Vec::with_capacity(2 * n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((format!("{prefix}.re_{i}_{j}"), m.get(i, j).re));
            out.push((format!("{prefix}.im_{i}_{j}"), m.get(i, j).im));
        }
    }
    out
}

/// Flat `key=value` lines.
pub fn write_ergodic_report<W: Write>(w: &mut W, meta: &Metadata, report: &ErgodicReport) -> Result<()> {
    writeln!(w, "{}", meta.header_line())?;
    writeln!(w, "distance={}", fmt_f64(report.distance))?;
    for (k, v) in matrix_entries("time_avg_state", report.time_avg_state.matrix())
        .into_iter()
        .chain(matrix_entries("eta_eq", report.eta_eq.matrix()))
    {
        writeln!(w, "{k}={}", fmt_f64(v))?;
    }
    for (name, d) in &report.variance_decomposition {
        writeln!(w, "variance.{name}.lhs={}", fmt_f64(d.lhs))?;
        writeln!(w, "variance.{name}.term1={}", fmt_f64(d.term1))?;
        writeln!(w, "variance.{name}.term2={}", fmt_f64(d.term2))?;
        writeln!(w, "variance.{name}.residual={}", fmt_f64(d.residual))?;
    }
    Ok(())
}
