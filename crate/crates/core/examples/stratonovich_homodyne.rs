//! Pure-state homodyne trajectories integrated in Stratonovich form on the
//! manifold of pure states, compared with the Ito a-posteriori equation and
//! the master equation.

use std::f64::consts::FRAC_PI_2;

use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::{pauli, PureStateVector};
use qtraj::master::evolve_master;
use qtraj::sde::{run_ensemble_with, simulate_stratonovich_pure, EnsembleOptions, Mode, SimOptions, TimeGrid};

fn main() -> qtraj::Result<()> {
    let m = generate_atom_model(&TwoLevelAtomSpec::homodyne(1.0, 1.0, FRAC_PI_2))?;
    let psi0 = PureStateVector::basis(2, 0);
    let grid = TimeGrid::new(3.0, 1e-3)?;

    let single = simulate_stratonovich_pure(&m, &psi0, &grid, 9)?;
    let worst = single.entropy_path.iter().cloned().fold(0.0, f64::max);
    println!("one Stratonovich path: max linear entropy {worst:.2e}");

    let opts = EnsembleOptions {
        sim: SimOptions { record_every: 500, record_output: false, ..SimOptions::default() },
        observables: vec![pauli::sigma_z()],
    };
    let rho0 = psi0.projector();
    let strat = run_ensemble_with(&m, &rho0, &grid, 400, 9, Mode::Stratonovich, &opts)?;
    let ito = run_ensemble_with(&m, &rho0, &grid, 400, 9, Mode::Posterior, &opts)?;
    let eta = evolve_master(&m, &rho0, &strat.times)?;
    println!("{:>5} {:>20} {:>20} {:>10}", "t", "Stratonovich <σ_z>", "Ito <σ_z>", "master");
    for (k, t) in strat.times.iter().enumerate() {
        println!(
            "{t:>5.2} {:>11.4} ± {:.4} {:>11.4} ± {:.4} {:>10.4}",
            strat.observable_mean[0][k],
            strat.observable_se[0][k],
            ito.observable_mean[0][k],
            ito.observable_se[0][k],
            eta[k].expectation(&pauli::sigma_z())?.re
        );
    }
    Ok(())
}
