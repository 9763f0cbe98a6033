//! The noise-free contraction flow `ψ ↦ e^{Lt}ψ` of homodyne detection: every
//! start outside the excited state is driven to the ground state.

use std::f64::consts::FRAC_PI_2;

use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::{PureStateVector, QuantumState};
use qtraj::sde::deterministic_flow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qtraj::Result<()> {
    let m = generate_atom_model(&TwoLevelAtomSpec::homodyne(1.0, 1.0, FRAC_PI_2))?;
    let ground = QuantumState::basis(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let psi = PureStateVector::haar(2, &mut rng);
        let flow = deterministic_flow(&m, &psi, 1e7, 1.0, None)?;
        match flow.limit {
            Some(limit) => {
                println!("converged, distance to ground {:.2e}", (limit.matrix() - ground.matrix()).hs_norm())
            }
            None => println!("not converged by t = 1e7"),
        }
    }
    Ok(())
}
