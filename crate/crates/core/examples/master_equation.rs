//! Mean evolution of a resonantly driven two-level atom: the master-equation
//! path from the excited state and its stationary state, compared with the
//! closed-form resonance-fluorescence populations.

use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::{pauli, QuantumState};
use qtraj::master::{equilibrium, evolve_master};

fn main() -> qtraj::Result<()> {
    let (gamma, rabi, detuning) = (1.0, 2.0, 0.5);
    let spec = TwoLevelAtomSpec::heterodyne(gamma, rabi).with_detuning(detuning);
    let m = generate_atom_model(&spec)?;

    let times: Vec<f64> = (0..=10).map(|k| k as f64).collect();
    let path = evolve_master(&m, &QuantumState::basis(2, 0), &times)?;
    println!("{:>5} {:>10} {:>10}", "t", "<σ_z>", "entropy");
    for (t, eta) in times.iter().zip(&path) {
        println!("{t:>5.1} {:>10.6} {:>10.6}", eta.expectation(&pauli::sigma_z())?.re, eta.linear_entropy());
    }

    let eta = equilibrium(&m)?;
    let excited = eta.matrix().get(0, 0).re;
    let closed = (rabi * rabi / 4.0) / (detuning * detuning + gamma * gamma / 4.0 + rabi * rabi / 2.0);
    println!("stationary excited population {excited:.12} (closed form {closed:.12})");
    Ok(())
}
