//! The linear equation under the reference law: the trace of the
//! unnormalized state is a positive martingale with mean one, and the
//! weighted ensemble mean reproduces the master equation.

use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::QuantumState;
use qtraj::master::evolve_master;
use qtraj::sde::{run_ensemble_with, EnsembleOptions, Mode, SimOptions, TimeGrid};

fn main() -> qtraj::Result<()> {
    let m = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0))?;
    let rho0 = QuantumState::basis(2, 0);
    let grid = TimeGrid::new(4.0, 1e-3)?;
    let opts = EnsembleOptions {
        sim: SimOptions { record_every: 500, record_output: false, ..SimOptions::default() },
        observables: vec![],
    };
    let stats = run_ensemble_with(&m, &rho0, &grid, 1000, 1, Mode::Linear, &opts)?;
    let eta = evolve_master(&m, &rho0, &stats.times)?;

    println!("{:>5} {:>18} {:>24} {:>10}", "t", "E[Tr σ]", "E[σ_00] ± se", "η_00");
    for (k, t) in stats.times.iter().enumerate() {
        println!(
            "{t:>5.2} {:>9.4} ± {:.4} {:>13.4} ± {:.4} {:>10.4}",
            stats.mean_weight[k],
            stats.weight_se[k],
            stats.mean_state[k].get(0, 0).re,
            stats.state_se_re[k][(0, 0)],
            eta[k].matrix().get(0, 0).re
        );
    }
    Ok(())
}
