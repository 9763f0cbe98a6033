//! Long-run behaviour of a single trajectory: the empirical invariant
//! measure on the Bloch sphere for heterodyne detection (which visits every
//! cell) and for homodyne detection at φ = π/2 (which stays on a great
//! circle), plus the ergodic comparison with the stationary state.

use std::f64::consts::FRAC_PI_2;

use qtraj::analysis::{empirical_invariant_measure, ergodic_report, great_circle_concentration};
use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::{pauli, QuantumState};
use qtraj::master::equilibrium;
use qtraj::sde::{simulate_posterior_with, SimOptions, TimeGrid};

fn main() -> qtraj::Result<()> {
    let opts = SimOptions { record_every: 10, record_output: false, ..SimOptions::default() };
    let grid = TimeGrid::new(400.0, 1e-3)?;

    let het = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 2.0))?;
    let traj = simulate_posterior_with(&het, &QuantumState::basis(2, 1), &grid, 4, &opts)?;
    let hist = empirical_invariant_measure(&traj, (12, 24), 10.0)?;
    println!("heterodyne: {}/{} cells visited", hist.occupied_bins(), 12 * 24);
    for (i, row) in hist.dwell_time.iter().enumerate() {
        let band: f64 = row.iter().sum();
        println!("  θ band {i:>2}: dwell fraction {:.4}", band / hist.total_dwell());
    }
    let eta = equilibrium(&het)?;
    let report = ergodic_report(&traj, &eta, 10.0, &[("sigma_z".into(), pauli::sigma_z())])?;
    let d = report.variance_decomposition[0].1;
    println!("  |time average − η_eq| = {:.4}", report.distance);
    println!("  D²(σ_z; η_eq) = {:.4} vs {:.4} + {:.4}", d.lhs, d.term1, d.term2);

    let hom = generate_atom_model(&TwoLevelAtomSpec::homodyne(1.0, 1.0, FRAC_PI_2))?;
    let traj = simulate_posterior_with(&hom, &QuantumState::basis(2, 0), &grid, 4, &opts)?;
    let fit = great_circle_concentration(&traj, 10.0, 0.1)?;
    println!(
        "homodyne φ=π/2: {:.4} of dwell time within 0.1 rad of the circle with normal ({:.3}, {:.3}, {:.3})",
        fit.fraction_within, fit.normal[0], fit.normal[1], fit.normal[2]
    );
    Ok(())
}
