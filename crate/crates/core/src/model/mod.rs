//! Measurement model: Hamiltonian, diffusive operators `L_j`, jump channels
//! over a finite outcome set and dissipative operators `S_h`, together with
//! the generator pieces built from them.

mod checks;
mod config;

use std::sync::OnceLock;

use sha2::{Digest, Sha256};

pub use checks::{
    check_ellipticity, check_pure_preserving, check_purification_obstruction_dim2, EllipticityReport,
    ObstructionReport, ProportionalityCheck, PurePreservingReport, PurityWitness,
};
pub use config::{matrix_from_repr, matrix_to_repr, JumpChannelConfig, MatrixRepr, ModelConfig};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, NumericPolicy, QuantumState, C64, I};
use crate::master::VectorizedLiouvillian;

/// One point `y_k` of the discretized outcome space with its mass `ν_k` and
/// Kraus operators `J_n(y_k)`.
#[derive(Clone, Debug)]
pub struct JumpChannel {
    pub label: String,
    pub weight: f64,
    pub kraus_ops: Vec<ComplexMatrix>,
    kraus_adj: Vec<ComplexMatrix>,
    /// `Σ_n J_n* J_n`
    effect: ComplexMatrix,
}

impl JumpChannel {
    /// `𝒥*[1](y_k) = Σ_n J_n* J_n`
    pub fn effect(&self) -> &ComplexMatrix {
        &self.effect
    }

    /// `𝒥[ρ](y_k) = Σ_n J_n ρ J_n*`
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(rho.dim());
        for (j, jd) in self.kraus_ops.iter().zip(&self.kraus_adj) {
            acc += &(&(j * rho) * jd);
        }
        acc
    }
}

/// Immutable model. Derived operators `D₁`, `D₂`, `D₃` and the total jump
/// mass are computed once at build time.
#[derive(Clone, Debug)]
pub struct MeasurementModel {
    dim: usize,
    hamiltonian: ComplexMatrix,
    diffusive_ops: Vec<ComplexMatrix>,
    diffusive_adj: Vec<ComplexMatrix>,
    jump_channels: Vec<JumpChannel>,
    dissipative_ops: Vec<ComplexMatrix>,
    dissipative_adj: Vec<ComplexMatrix>,
    d1: ComplexMatrix,
    d2: ComplexMatrix,
    d3: ComplexMatrix,
    total_jump_mass: f64,
    config: ModelConfig,
    warnings: Vec<String>,
    pub(crate) vectorized: OnceLock<VectorizedLiouvillian>,
}

fn check_dim(m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.dim() });
    }
    Ok(())
}

fn sum_of_squares(n: usize, ops: &[ComplexMatrix]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(n);
    for op in ops {
        acc += &(&op.adjoint() * op);
    }
    acc.hermitize()
}

/// Validates a model description and computes the derived operators.
pub fn build_model(config: &ModelConfig) -> Result<MeasurementModel> {
    let n = config.dimension;
    if n == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let read = |repr: &MatrixRepr| -> Result<ComplexMatrix> {
        let m = matrix_from_repr(repr)?;
        check_dim(&m, n)?;
        if !m.is_finite() {
            return Err(Error::Config("non-finite matrix entry".into()));
        }
        Ok(m)
    };

    let hamiltonian = read(&config.hamiltonian)?;
    let defect = hamiltonian.hermiticity_defect();
    if defect > NumericPolicy::default().hamiltonian_tol * n as f64 {
        return Err(Error::NonHermitianH(defect));
    }
    let hamiltonian = hamiltonian.hermitize();

    let diffusive_ops = config.diffusive_ops.iter().map(read).collect::<Result<Vec<_>>>()?;
    let dissipative_ops = config.dissipative_ops.iter().map(read).collect::<Result<Vec<_>>>()?;

    let mut jump_channels = Vec::with_capacity(config.jump_channels.len());
    for ch in &config.jump_channels {
        if !(ch.weight > 0.0 && ch.weight.is_finite()) {
            return Err(Error::Config(format!("jump channel '{}' has non-positive weight", ch.label)));
        }
        if ch.kraus.is_empty() {
            return Err(Error::Config(format!("jump channel '{}' has no Kraus operators", ch.label)));
        }
        let kraus_ops = ch.kraus.iter().map(read).collect::<Result<Vec<_>>>()?;
        let kraus_adj = kraus_ops.iter().map(ComplexMatrix::adjoint).collect();
        let effect = sum_of_squares(n, &kraus_ops);
        jump_channels.push(JumpChannel { label: ch.label.clone(), weight: ch.weight, kraus_ops, kraus_adj, effect });
    }

    let mut warnings = Vec::new();
    if diffusive_ops.is_empty() && jump_channels.is_empty() && dissipative_ops.is_empty() {
        let msg = if hamiltonian.hs_norm() == 0.0 {
            "EmptyModel: no channels and zero Hamiltonian; the generator vanishes"
        } else {
            "EmptyModel: no measurement or dissipation channels; dynamics is unitary"
        };
        log::warn!("{msg}");
        warnings.push(msg.to_string());
    }

    let d1 = sum_of_squares(n, &diffusive_ops);
    let d3 = sum_of_squares(n, &dissipative_ops);
    let mut d2 = ComplexMatrix::zeros(n);
    for ch in &jump_channels {
        d2.axpy(C64::new(ch.weight, 0.0), &ch.effect);
    }
    let total_jump_mass = jump_channels.iter().map(|c| c.weight).sum();

    Ok(MeasurementModel {
        dim: n,
        hamiltonian,
        diffusive_adj: diffusive_ops.iter().map(ComplexMatrix::adjoint).collect(),
        diffusive_ops,
        jump_channels,
        dissipative_adj: dissipative_ops.iter().map(ComplexMatrix::adjoint).collect(),
        dissipative_ops,
        d1,
        d2,
        d3,
        total_jump_mass,
        config: config.clone(),
        warnings,
        vectorized: OnceLock::new(),
    })
}

/// Assembles a [`ModelConfig`] from matrices.
#[derive(Clone, Debug)]
pub struct ModelBuilder {
    config: ModelConfig,
}

impl ModelBuilder {
    pub fn new(dim: usize) -> Self {
        let zero = matrix_to_repr(&ComplexMatrix::zeros(dim.max(1)));
        Self {
            config: ModelConfig {
                dimension: dim,
                hamiltonian: zero,
                diffusive_ops: Vec::new(),
                dissipative_ops: Vec::new(),
                jump_channels: Vec::new(),
            },
        }
    }

    pub fn hamiltonian(mut self, h: &ComplexMatrix) -> Self {
        self.config.hamiltonian = matrix_to_repr(h);
        self
    }

    pub fn diffusive(mut self, l: &ComplexMatrix) -> Self {
        self.config.diffusive_ops.push(matrix_to_repr(l));
        self
    }

    pub fn dissipative(mut self, s: &ComplexMatrix) -> Self {
        self.config.dissipative_ops.push(matrix_to_repr(s));
        self
    }

    pub fn jump_channel(mut self, label: &str, weight: f64, kraus: &[ComplexMatrix]) -> Self {
        self.config.jump_channels.push(JumpChannelConfig {
            label: label.to_string(),
            weight,
            kraus: kraus.iter().map(matrix_to_repr).collect(),
        });
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn build(self) -> Result<MeasurementModel> {
        build_model(&self.config)
    }
}

impl MeasurementModel {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn diffusive_ops(&self) -> &[ComplexMatrix] {
        &self.diffusive_ops
    }

    pub(crate) fn diffusive_adj(&self) -> &[ComplexMatrix] {
        &self.diffusive_adj
    }

    pub fn jump_channels(&self) -> &[JumpChannel] {
        &self.jump_channels
    }

    pub fn dissipative_ops(&self) -> &[ComplexMatrix] {
        &self.dissipative_ops
    }

    /// `D₁ = Σ L_j* L_j`
    pub fn d1(&self) -> &ComplexMatrix {
        &self.d1
    }

    /// `D₂ = Σ_k ν_k Σ_n J_n(y_k)* J_n(y_k)`
    pub fn d2(&self) -> &ComplexMatrix {
        &self.d2
    }

    /// `D₃ = Σ S_h* S_h`
    pub fn d3(&self) -> &ComplexMatrix {
        &self.d3
    }

    /// `ν(𝒴)`
    pub fn total_jump_mass(&self) -> f64 {
        self.total_jump_mass
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Short content hash of the canonical serialized config.
    pub fn content_hash(&self) -> String {
        let text = self.config.to_toml_string().unwrap_or_default();
        Sha256::digest(text.as_bytes()).iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    fn check(&self, rho: &ComplexMatrix) -> Result<()> {
        check_dim(rho, self.dim)
    }

    fn check_jump_index(&self, k: usize) -> Result<&JumpChannel> {
        self.jump_channels.get(k).ok_or(Error::BadChannelIndex { index: k, count: self.jump_channels.len() })
    }

    fn check_diffusive_index(&self, j: usize) -> Result<()> {
        if j >= self.diffusive_ops.len() {
            return Err(Error::BadChannelIndex { index: j, count: self.diffusive_ops.len() });
        }
        Ok(())
    }

    /// `𝓛₀[ρ] = −i[H, ρ]`
    pub fn l0(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(rho)?;
        Ok(self.hamiltonian.commutator(rho).scale(-I))
    }

    /// `𝓛₁[ρ] = Σ L_j ρ L_j* − ½{D₁, ρ}`
    pub fn l1(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(rho)?;
        Ok(lindblad_part(&self.diffusive_ops, &self.diffusive_adj, &self.d1, rho))
    }

    /// `𝓛₂[ρ] = 𝓡_𝒴[ρ] − ½{D₂, ρ}`
    pub fn l2(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(rho)?;
        let mut acc = self.jump_sum(rho);
        acc.axpy(C64::new(-0.5, 0.0), &self.d2.anticommutator(rho));
        Ok(acc)
    }

    /// `𝓛₃[ρ] = Σ S_h ρ S_h* − ½{D₃, ρ}`
    pub fn l3(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check(rho)?;
        Ok(lindblad_part(&self.dissipative_ops, &self.dissipative_adj, &self.d3, rho))
    }

    /// `𝓡_𝒴[ρ] = Σ_k ν_k 𝒥[ρ](y_k)`
    pub(crate) fn jump_sum(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for ch in &self.jump_channels {
            acc.axpy(C64::new(ch.weight, 0.0), &ch.apply(rho));
        }
        acc
    }

    /// Full generator without the dimension check.
    pub(crate) fn liouvillian(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = self.hamiltonian.commutator(rho).scale(-I);
        acc += &lindblad_part(&self.diffusive_ops, &self.diffusive_adj, &self.d1, rho);
        acc += &self.jump_sum(rho);
        acc.axpy(C64::new(-0.5, 0.0), &self.d2.anticommutator(rho));
        acc += &lindblad_part(&self.dissipative_ops, &self.dissipative_adj, &self.d3, rho);
        acc
    }

    /// `𝓚[ρ]` without the dimension check.
    pub(crate) fn k_map(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = self.hamiltonian.commutator(rho).scale(-I);
        acc += &lindblad_part(&self.diffusive_ops, &self.diffusive_adj, &self.d1, rho);
        acc.axpy(C64::new(-0.5, 0.0), &self.d2.anticommutator(rho));
        acc.axpy(C64::new(self.total_jump_mass, 0.0), rho);
        acc += &lindblad_part(&self.dissipative_ops, &self.dissipative_adj, &self.d3, rho);
        acc
    }
}

fn lindblad_part(
    ops: &[ComplexMatrix],
    adj: &[ComplexMatrix],
    d: &ComplexMatrix,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let mut acc = d.anticommutator(rho).scale_real(-0.5);
    for (l, ld) in ops.iter().zip(adj) {
        acc += &(&(l * rho) * ld);
    }
    acc
}

/// `𝓛[ρ] = Σᵢ 𝓛ᵢ[ρ]`
pub fn apply_liouvillian(m: &MeasurementModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check(rho)?;
    Ok(m.liouvillian(rho))
}

/// `𝓚[ρ] = 𝓛₀[ρ] + 𝓛₁[ρ] − ½D₂ρ − ½ρD₂ + ν(𝒴)ρ + 𝓛₃[ρ]`
pub fn apply_k(m: &MeasurementModel, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    m.check(rho)?;
    Ok(m.k_map(rho))
}

/// `𝒥[ρ](y_k)`
pub fn apply_jump(m: &MeasurementModel, rho: &ComplexMatrix, k: usize) -> Result<ComplexMatrix> {
    let ch = m.check_jump_index(k)?;
    m.check(rho)?;
    Ok(ch.apply(rho))
}

/// `λ_k = Tr{𝒥[ρ](y_k)}`
pub fn jump_rate(m: &MeasurementModel, rho: &QuantumState, k: usize) -> Result<f64> {
    let ch = m.check_jump_index(k)?;
    m.check(rho.matrix())?;
    Ok(crate::linalg::hs_inner(&ch.effect, rho.matrix())?.re.max(0.0))
}

/// `m_j = Tr{(L_j + L_j*) ρ}`
pub fn output_drift(m: &MeasurementModel, rho: &QuantumState, j: usize) -> Result<f64> {
    m.check_diffusive_index(j)?;
    m.check(rho.matrix())?;
    let x = &m.diffusive_ops[j] + &m.diffusive_adj[j];
    Ok(crate::linalg::hs_inner(&x, rho.matrix())?.re)
}
