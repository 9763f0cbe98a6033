//! Two-level atom driven by a resonant laser, observed through its
//! fluorescence light by heterodyne, homodyne or direct photodetection.
//!
//! With `z = ⟨α|λ⟩` the Hamiltonian is
//! `H = −½Δω σ_z + i z̄ σ_- − i z σ_+`, the line-width is `‖α‖²` and the Rabi
//! frequency is `Ω = 2|z|`.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::pauli::{sigma_minus, sigma_plus, sigma_z};
use crate::linalg::{ComplexMatrix, C64, I};
use crate::model::{MeasurementModel, ModelBuilder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detection {
    /// One diffusive channel `e^{−iφ}‖α‖σ_-`.
    Homodyne,
    /// One diffusive channel `⟨e_j|α⟩σ_-` per component of `α`.
    Heterodyne,
    /// A single photon-counting jump channel with Kraus operator `‖α‖σ_-`.
    Direct,
}

impl FromStr for Detection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "homodyne" => Ok(Self::Homodyne),
            "heterodyne" => Ok(Self::Heterodyne),
            "direct" => Ok(Self::Direct),
            other => Err(Error::InvalidArgument(format!("unknown detection scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwoLevelAtomSpec {
    /// Detuning `Δω = ω − ω₀`.
    pub delta_omega: f64,
    /// Components `⟨e_j|α⟩`.
    pub alpha: Vec<C64>,
    /// `⟨α|λ⟩`
    pub lambda_inner: C64,
    pub detection: Detection,
    /// Local-oscillator phase, used by homodyne detection only.
    pub phi: f64,
}

impl TwoLevelAtomSpec {
    /// Heterodyne detection with `α = √γ (1, i)/√2`, resonant drive and
    /// `⟨α|λ⟩ = iΩ/2`.
    pub fn heterodyne(linewidth: f64, rabi: f64) -> Self {
        let a = (linewidth / 2.0).sqrt();
        Self {
            delta_omega: 0.0,
            alpha: vec![C64::new(a, 0.0), C64::new(0.0, a)],
            lambda_inner: I * (rabi / 2.0),
            detection: Detection::Heterodyne,
            phi: 0.0,
        }
    }

    /// Homodyne detection with `‖α‖² = γ`, resonant drive and `⟨α|λ⟩ = iΩ/2`.
    pub fn homodyne(linewidth: f64, rabi: f64, phi: f64) -> Self {
        Self {
            delta_omega: 0.0,
            alpha: vec![C64::new(linewidth.sqrt(), 0.0)],
            lambda_inner: I * (rabi / 2.0),
            detection: Detection::Homodyne,
            phi,
        }
    }

    /// Direct photodetection with `‖α‖² = γ`, resonant drive.
    pub fn direct(linewidth: f64, rabi: f64) -> Self {
        Self { detection: Detection::Direct, ..Self::homodyne(linewidth, rabi, 0.0) }
    }

    pub fn with_detuning(mut self, delta_omega: f64) -> Self {
        self.delta_omega = delta_omega;
        self
    }

    /// `‖α‖²`
    pub fn linewidth(&self) -> f64 {
        self.alpha.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Ω = 2|⟨α|λ⟩|`
    pub fn rabi_frequency(&self) -> f64 {
        2.0 * self.lambda_inner.norm()
    }

    pub fn hamiltonian(&self) -> ComplexMatrix {
        let z = self.lambda_inner;
        let mut h = sigma_z().scale_real(-0.5 * self.delta_omega);
        h += &sigma_minus().scale(I * z.conj());
        h -= &sigma_plus().scale(I * z);
        h
    }
}

pub fn generate_atom_model(spec: &TwoLevelAtomSpec) -> Result<MeasurementModel> {
    let gamma = spec.linewidth();
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::ZeroLinewidth);
    }
    if !(spec.rabi_frequency() > 0.0 && spec.rabi_frequency().is_finite()) {
        return Err(Error::ZeroRabi);
    }
    if !spec.delta_omega.is_finite() || !spec.phi.is_finite() {
        return Err(Error::InvalidArgument("detuning and phase must be finite".into()));
    }
    let norm = gamma.sqrt();
    let builder = ModelBuilder::new(2).hamiltonian(&spec.hamiltonian());
    let builder = match spec.detection {
        Detection::Heterodyne => spec.alpha.iter().fold(builder, |b, &a| b.diffusive(&sigma_minus().scale(a))),
        Detection::Homodyne => builder.diffusive(&sigma_minus().scale(C64::from_polar(norm, -spec.phi))),
        Detection::Direct => builder.jump_channel("count", 1.0, &[sigma_minus().scale_real(norm)]),
    };
    builder.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::sigma_x;

    #[test]
    fn resonant_drive_is_sigma_x() {
        let spec = TwoLevelAtomSpec::homodyne(1.0, 3.0, 0.0);
        assert!((spec.hamiltonian() - sigma_x().scale_real(1.5)).hs_norm() < 1e-15);
    }

    #[test]
    fn detuning_enters_sigma_z() {
        let spec = TwoLevelAtomSpec::homodyne(1.0, 2.0, 0.0).with_detuning(0.4);
        let expected = &sigma_x() + &sigma_z().scale_real(-0.2);
        assert!((spec.hamiltonian() - expected).hs_norm() < 1e-15);
    }

    #[test]
    fn variants_share_hamiltonian() {
        let het = generate_atom_model(&TwoLevelAtomSpec::heterodyne(1.0, 1.0)).unwrap();
        let hom = generate_atom_model(&TwoLevelAtomSpec::homodyne(1.0, 1.0, 0.3)).unwrap();
        let dir = generate_atom_model(&TwoLevelAtomSpec::direct(1.0, 1.0)).unwrap();
        assert!((het.hamiltonian() - hom.hamiltonian()).hs_norm() < 1e-15);
        assert!((het.hamiltonian() - dir.hamiltonian()).hs_norm() < 1e-15);
        assert_eq!(het.diffusive_ops().len(), 2);
        assert_eq!(hom.diffusive_ops().len(), 1);
        assert!(dir.diffusive_ops().is_empty());
        assert_eq!(dir.jump_channels()[0].label, "count");
        assert_eq!(dir.jump_channels()[0].weight, 1.0);
        // Total decay rate ‖α‖² in every variant.
        for m in [&het, &hom] {
            assert!((m.d1().get(0, 0).re - 1.0).abs() < 1e-15);
        }
        assert!((dir.d2().get(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn homodyne_phase() {
        let m = generate_atom_model(&TwoLevelAtomSpec::homodyne(4.0, 1.0, std::f64::consts::FRAC_PI_2)).unwrap();
        let l = &m.diffusive_ops()[0];
        assert!((l.get(1, 0) - C64::new(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_parameters() {
        let mut spec = TwoLevelAtomSpec::heterodyne(1.0, 1.0);
        spec.lambda_inner = C64::new(0.0, 0.0);
        assert!(matches!(generate_atom_model(&spec), Err(Error::ZeroRabi)));
        let spec = TwoLevelAtomSpec::heterodyne(0.0, 1.0);
        assert!(matches!(generate_atom_model(&spec), Err(Error::ZeroLinewidth)));
    }

    #[test]
    fn detection_parses() {
        assert_eq!("direct".parse::<Detection>().unwrap(), Detection::Direct);
        assert!("photon".parse::<Detection>().is_err());
    }
}
