//! Purification under heterodyne detection: starting from the maximally
//! mixed state, the mean linear entropy of the a-posteriori state decays to
//! zero because no operator in the model is proportional to the identity on
//! a subspace.

use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::QuantumState;
use qtraj::model::check_purification_obstruction_dim2;
use qtraj::sde::{run_ensemble_with, EnsembleOptions, Mode, SimOptions, TimeGrid};

fn main() -> qtraj::Result<()> {
    let m = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0))?;
    let obstruction = check_purification_obstruction_dim2(&m)?;
    println!("purification obstruction: {}", obstruction.obstruction_exists);

    let grid = TimeGrid::new(10.0, 1e-3)?;
    let opts = EnsembleOptions {
        sim: SimOptions { record_every: 1000, record_output: false, ..SimOptions::default() },
        observables: vec![],
    };
    let stats = run_ensemble_with(&m, &QuantumState::maximally_mixed(2), &grid, 200, 3, Mode::Posterior, &opts)?;
    println!("{:>5} {:>12} {:>10}", "t", "G(t)", "se");
    for (k, t) in stats.times.iter().enumerate() {
        println!("{t:>5.1} {:>12.4e} {:>10.2e}", stats.mean_entropy[k], stats.entropy_se[k]);
    }
    Ok(())
}
