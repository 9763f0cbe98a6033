//! Structural diagnostics of the two-level atom under heterodyne detection:
//! pure-state preservation, the purification obstruction, ellipticity of the
//! diffusion on the pure states and the Lie-rank condition at the ground
//! state, where ellipticity fails.

use qtraj::analysis::lie_rank_check;
use qtraj::atom::{generate_atom_model, TwoLevelAtomSpec};
use qtraj::linalg::PureStateVector;
use qtraj::model::{check_ellipticity, check_pure_preserving, check_purification_obstruction_dim2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qtraj::Result<()> {
    let m = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0))?;

    let pp = check_pure_preserving(&m, 50, 1)?;
    println!("pure-preserving: {} ({} probes)", pp.verdict, pp.probes_checked);
    println!("purification obstruction: {}", check_purification_obstruction_dim2(&m)?.obstruction_exists);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let elliptic = (0..100)
        .map(|_| check_ellipticity(&m, &PureStateVector::haar(2, &mut rng)).map(|r| r.elliptic))
        .collect::<qtraj::Result<Vec<_>>>()?;
    println!("elliptic at {}/100 random pure states", elliptic.iter().filter(|&&e| e).count());

    for (name, k) in [("excited", 0), ("ground", 1)] {
        let psi = PureStateVector::basis(2, k);
        let e = check_ellipticity(&m, &psi)?;
        println!("{name}: elliptic {} singular values {:?}", e.elliptic, e.singular_values);
        for depth in 0..=2 {
            let r = lie_rank_check(&m, &psi, depth)?;
            println!("  bracket depth {depth}: rank {} of {} (full {})", r.rank, 2, r.full);
        }
    }
    Ok(())
}
