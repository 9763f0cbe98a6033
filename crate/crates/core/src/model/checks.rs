use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::MeasurementModel;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, PureStateVector, C64, ONE, ZERO};

/// A probe state whose normalized post-jump state is not pure.
#[derive(Clone, Debug)]
pub struct PurityWitness {
    pub psi: PureStateVector,
    pub channel: usize,
    /// Second-largest over largest eigenvalue of `𝒥[|ψ><ψ|](y_k)`.
    pub rank_ratio: f64,
}

#[derive(Clone, Debug)]
pub struct PurePreservingReport {
    pub verdict: bool,
    /// `𝓛₃ ≠ 0`
    pub dissipation_present: bool,
    pub probes_checked: usize,
    pub witnesses: Vec<PurityWitness>,
    /// Structural statements that are assumed rather than tested.
    pub assumptions: Vec<String>,
}

/// Samples pure states (computational basis first, then Haar-random) and
/// checks that every jump channel maps them to rank-one outputs, and that
/// the dissipative part of the generator vanishes identically.
pub fn check_pure_preserving(m: &MeasurementModel, n_samples: usize, rng_seed: u64) -> Result<PurePreservingReport> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let n = m.dim();
    let dissipation_present = (0..n * n).any(|idx| {
        let e = ComplexMatrix::from_fn(n, |i, j| if i * n + j == idx { ONE } else { ZERO });
        m.l3(&e).map(|x| x.hs_norm() > 1e-12).unwrap_or(true)
    });

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let probes: Vec<PureStateVector> = (0..n)
        .map(|k| PureStateVector::basis(n, k))
        .chain((0..n_samples).map(|_| PureStateVector::haar(n, &mut rng)))
        .collect();

    let mut witnesses = Vec::new();
    for psi in &probes {
        let rho = psi.projector();
        for (k, ch) in m.jump_channels().iter().enumerate() {
            let out = ch.apply(rho.matrix());
            let tr = out.trace().re;
            if tr <= 1e-12 {
                continue;
            }
            let eig = hermitian_eigen(&out.hermitize());
            let second = eig.get(1).map(|p| p.value).unwrap_or(0.0);
            if second > 1e-8 * tr {
                witnesses.push(PurityWitness { psi: psi.clone(), channel: k, rank_ratio: second / eig[0].value });
            }
        }
    }

    Ok(PurePreservingReport {
        verdict: !dissipation_present && witnesses.is_empty(),
        dissipation_present,
        probes_checked: probes.len(),
        witnesses,
        assumptions: vec!["jump-channel purity is tested on sampled states only; the representing operator V, \
             the set A and the projections P_y are not constructed"
            .into()],
    })
}

/// Whether `a` is a multiple `z·1` of the identity, and the multiple.
#[derive(Clone, Debug)]
pub struct ProportionalityCheck {
    pub proportional: bool,
    pub factor: C64,
    pub residual: f64,
}

fn proportional_to_identity(a: &ComplexMatrix) -> ProportionalityCheck {
    let n = a.dim();
    let factor = a.trace() / n as f64;
    let residual = (a - &ComplexMatrix::identity(n).scale(factor)).hs_norm();
    ProportionalityCheck { proportional: residual <= 1e-10 * a.hs_norm().max(1.0), factor, residual }
}

#[derive(Clone, Debug)]
pub struct ObstructionReport {
    /// All conditions hold with `P = 1`; purification is not predicted.
    pub obstruction_exists: bool,
    /// `L_j + L_j*` against the identity, per diffusive channel.
    pub diffusive: Vec<ProportionalityCheck>,
    /// `𝒥*[1](y_k)` against the identity, per jump channel.
    pub jump: Vec<ProportionalityCheck>,
    /// The condition restricted to the pure-state subset of outcomes is
    /// not checked.
    pub skipped: Vec<String>,
}

/// At dimension two the only two-dimensional projection is the identity, so
/// the obstruction to purification reduces to proportionality checks.
pub fn check_purification_obstruction_dim2(m: &MeasurementModel) -> Result<ObstructionReport> {
    if m.dim() != 2 {
        return Err(Error::DimensionNotTwo(m.dim()));
    }
    let diffusive: Vec<_> =
        m.diffusive_ops().iter().zip(m.diffusive_adj()).map(|(l, ld)| proportional_to_identity(&(l + ld))).collect();
    let jump: Vec<_> = m.jump_channels().iter().map(|c| proportional_to_identity(c.effect())).collect();
    let obstruction_exists = diffusive.iter().chain(&jump).all(|c| c.proportional);
    Ok(ObstructionReport {
        obstruction_exists,
        diffusive,
        jump,
        skipped: vec!["vanishing of P 𝒥*[1](y) P on the outcome set A is not verifiable".into()],
    })
}

#[derive(Clone, Debug)]
pub struct EllipticityReport {
    pub elliptic: bool,
    /// Singular values of `φ ↦ (Re⟨φ|L_j ψ⟩)_j` on `ψ^⊥`, descending.
    pub singular_values: Vec<f64>,
    /// A nonzero `φ ⊥ ψ` with `Re⟨φ|L_j ψ⟩ = 0` for every `j`.
    pub failing_direction: Option<DVector<C64>>,
}

const ELLIPTICITY_SV_TOL: f64 = 1e-9;

/// Orthonormal basis of the complement of `psi`.
pub(crate) fn orthogonal_complement(psi: &DVector<C64>) -> Vec<DVector<C64>> {
    let n = psi.len();
    let mut basis: Vec<DVector<C64>> = vec![psi.clone()];
    let mut candidates: Vec<DVector<C64>> = (0..n)
        .map(|k| {
            let mut e = DVector::from_element(n, ZERO);
            e[k] = ONE;
            e
        })
        .collect();
    while basis.len() < n {
        let (best, vec) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut r = c.clone();
                for b in &basis {
                    let coeff = b.dotc(&r);
                    r -= b * coeff;
                }
                (i, r)
            })
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("candidates left");
        candidates.remove(best);
        let norm = vec.norm();
        basis.push(vec / C64::new(norm, 0.0));
    }
    basis.remove(0);
    basis
}

/// Whether the diffusion fields span the tangent space of the pure-state
/// manifold at `|ψ><ψ|`.
pub fn check_ellipticity(m: &MeasurementModel, psi: &PureStateVector) -> Result<EllipticityReport> {
    if m.diffusive_ops().is_empty() {
        return Err(Error::NoDiffusiveChannels);
    }
    if psi.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: psi.dim() });
    }
    let complement = orthogonal_complement(psi.amplitudes());
    let cols = 2 * complement.len();
    if cols == 0 {
        return Ok(EllipticityReport { elliptic: true, singular_values: vec![], failing_direction: None });
    }
    let images: Vec<DVector<C64>> = m.diffusive_ops().iter().map(|l| l.apply(psi.amplitudes())).collect();
    let rows = images.len().max(cols);
    // Real coordinates: φ = Σ_k (x_{2k} + i x_{2k+1}) u_k, and
    // Re⟨i u|v⟩ = Im⟨u|v⟩.
    let mut map = DMatrix::<f64>::zeros(rows, cols);
    for (j, lpsi) in images.iter().enumerate() {
        for (k, u) in complement.iter().enumerate() {
            let z = u.dotc(lpsi);
            map[(j, 2 * k)] = z.re;
            map[(j, 2 * k + 1)] = z.im;
        }
    }
    let svd = map.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let elliptic = singular_values.iter().filter(|&&s| s > ELLIPTICITY_SV_TOL).count() == cols;
    let failing_direction = if elliptic {
        None
    } else {
        let idx = *order.last().expect("nonempty");
        let x = v_t.row(idx);
        let mut phi = DVector::from_element(m.dim(), ZERO);
        for (k, u) in complement.iter().enumerate() {
            phi += u * C64::new(x[2 * k], x[2 * k + 1]);
        }
        Some(phi)
    };
    Ok(EllipticityReport { elliptic, singular_values, failing_direction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atom::{generate_atom_model, TwoLevelAtomSpec};
    use crate::linalg::pauli::*;
    use crate::model::ModelBuilder;

    fn e1() -> PureStateVector {
        PureStateVector::basis(2, 0)
    }

    #[test]
    fn dissipation_breaks_pure_preservation() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).dissipative(&sigma_z()).build().unwrap();
        let r = check_pure_preserving(&m, 10, 1).unwrap();
        assert!(!r.verdict && r.dissipation_present);
    }

    #[test]
    fn diffusive_only_model_preserves_purity() {
        let m = ModelBuilder::new(2).hamiltonian(&sigma_x()).diffusive(&sigma_minus()).build().unwrap();
        let r = check_pure_preserving(&m, 50, 1).unwrap();
        assert!(r.verdict && r.witnesses.is_empty());
    }

    #[test]
    fn mixing_jump_channel_has_witness_at_e1() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = ModelBuilder::new(2)
            .jump_channel("mix", 1.0, &[ComplexMatrix::identity(2).scale_real(s), sigma_x().scale_real(s)])
            .build()
            .unwrap();
        let r = check_pure_preserving(&m, 5, 2).unwrap();
        assert!(!r.verdict);
        let first = &r.witnesses[0];
        assert_eq!(first.psi, e1());
        // ½(|e><e| + |g><g|) has both eigenvalues ½.
        assert!((first.rank_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_jump_channel_preserves_purity() {
        let m = ModelBuilder::new(2).jump_channel("c", 1.0, &[sigma_minus()]).build().unwrap();
        assert!(check_pure_preserving(&m, 50, 3).unwrap().verdict);
    }

    #[test]
    fn obstruction_examples() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).build().unwrap();
        assert!(!check_purification_obstruction_dim2(&m).unwrap().obstruction_exists);

        let m = ModelBuilder::new(2).diffusive(&sigma_z().scale(crate::linalg::I)).build().unwrap();
        assert!(check_purification_obstruction_dim2(&m).unwrap().obstruction_exists);

        let m = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0)).unwrap();
        assert!(!check_purification_obstruction_dim2(&m).unwrap().obstruction_exists);

        let m3 = ModelBuilder::new(3).build().unwrap();
        assert!(matches!(check_purification_obstruction_dim2(&m3), Err(Error::DimensionNotTwo(3))));
    }

    #[test]
    fn ellipticity_heterodyne() {
        let m = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0)).unwrap();
        assert!(check_ellipticity(&m, &e1()).unwrap().elliptic);
        let r = check_ellipticity(&m, &PureStateVector::basis(2, 1)).unwrap();
        assert!(!r.elliptic);
        let phi = r.failing_direction.unwrap();
        assert!(phi.norm() > 0.5);
        // φ is orthogonal to the ground state.
        assert!(phi[1].norm() < 1e-12);
    }

    #[test]
    fn single_field_is_never_elliptic() {
        let m = ModelBuilder::new(2).diffusive(&sigma_minus()).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let psi = PureStateVector::haar(2, &mut rng);
            let r = check_ellipticity(&m, &psi).unwrap();
            assert!(!r.elliptic);
            let phi = r.failing_direction.unwrap();
            assert!(phi.dotc(psi.amplitudes()).norm() < 1e-12);
            assert!(phi.dotc(&sigma_minus().apply(psi.amplitudes())).re.abs() < 1e-12);
        }
    }

    #[test]
    fn ellipticity_requires_diffusion() {
        let m = ModelBuilder::new(2).build().unwrap();
        assert!(matches!(check_ellipticity(&m, &e1()), Err(Error::NoDiffusiveChannels)));
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let psi = PureStateVector::haar(4, &mut rng);
        let basis = orthogonal_complement(psi.amplitudes());
        assert_eq!(basis.len(), 3);
        for (i, u) in basis.iter().enumerate() {
            assert!(u.dotc(psi.amplitudes()).norm() < 1e-12);
            for (j, v) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u.dotc(v).norm() - want).abs() < 1e-12);
            }
        }
    }
}
