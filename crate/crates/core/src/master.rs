//! Deterministic reference dynamics: the master equation `dη/dt = 𝓛[η]` and
//! its stationary states, computed from the dense `n²×n²` matrix of `𝓛`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{matrix_exp, project_to_state, ComplexMatrix, QuantumState, C64, I};
use crate::model::MeasurementModel;

/// Matrix of `ρ ↦ 𝓛[ρ]` acting on column-stacked `vec(ρ)`, so that
/// `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
#[derive(Clone, Debug)]
pub struct VectorizedLiouvillian {
    dim: usize,
    matrix: DMatrix<C64>,
}

fn sandwich_term(a: &ComplexMatrix) -> DMatrix<C64> {
    // X ↦ A X A*  ⇒  conj(A) ⊗ A
    a.inner().map(|z| z.conj()).kronecker(a.inner())
}

impl VectorizedLiouvillian {
    pub fn new(m: &MeasurementModel) -> Self {
        let n = m.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let h = m.hamiltonian().inner();
        let d = (m.d1() + m.d2()) + m.d3().clone();
        let d = d.inner();

        let mut mat = id.kronecker(h) * (-I) + h.transpose().kronecker(&id) * I;
        mat -= id.kronecker(d) * C64::new(0.5, 0.0);
        mat -= d.transpose().kronecker(&id) * C64::new(0.5, 0.0);
        for l in m.diffusive_ops().iter().chain(m.dissipative_ops()) {
            mat += sandwich_term(l);
        }
        for ch in m.jump_channels() {
            for j in &ch.kraus_ops {
                mat += sandwich_term(j) * C64::new(ch.weight, 0.0);
            }
        }
        Self { dim: n, matrix: mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        ComplexMatrix::unvectorize(&(&self.matrix * rho.vectorize()))
    }

    /// `exp(𝓛t)` as an `n²×n²` matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let scaled = ComplexMatrix::try_from_dmatrix(&self.matrix * C64::new(t, 0.0)).expect("square by construction");
        matrix_exp(&scaled).into_inner()
    }
}

/// The model's vectorized generator, built on first use and shared afterwards.
pub fn vectorized_liouvillian(m: &MeasurementModel) -> &VectorizedLiouvillian {
    m.vectorized.get_or_init(|| VectorizedLiouvillian::new(m))
}

const TRACE_DRIFT_TOL: f64 = 1e-9;

/// `η_t = exp(𝓛t)[ρ₀]` at each requested time.
pub fn evolve_master(m: &MeasurementModel, rho0: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
    if rho0.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho0.dim() });
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::InvalidArgument("times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ascending".into()));
    }
    let gen = vectorized_liouvillian(m);
    let v0 = rho0.matrix().vectorize();
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return Ok(rho0.clone());
            }
            let eta = ComplexMatrix::unvectorize(&(gen.propagator(t) * &v0))?;
            let drift = (eta.trace() - C64::new(1.0, 0.0)).norm();
            if drift > TRACE_DRIFT_TOL {
                return Err(Error::TraceDrift(drift));
            }
            project_to_state(&eta)
        })
        .collect()
}

const KERNEL_REL_TOL: f64 = 1e-8;
const STATIONARITY_TOL: f64 = 1e-9;

/// The unique state with `𝓛[η] = 0`.
pub fn equilibrium(m: &MeasurementModel) -> Result<QuantumState> {
    let gen = vectorized_liouvillian(m);
    let svd = gen.matrix.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let threshold = KERNEL_REL_TOL * smax.max(1.0);
    let kernel: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= threshold).collect();
    match kernel.len() {
        0 => return Err(Error::NoStationaryState),
        1 => {}
        k => return Err(Error::NonUniqueEquilibrium(k)),
    }
    // Rows of V* are conjugated right singular vectors.
    let v = v_t.row(kernel[0]).transpose().map(|z| z.conj());
    let x = ComplexMatrix::unvectorize(&v)?;
    let tr = x.trace();
    if tr.norm() < 1e-12 {
        return Err(Error::NoStationaryState);
    }
    let eta = project_to_state(&x.scale(C64::new(1.0, 0.0) / tr))?;
    let residual = gen.apply(eta.matrix())?.hs_norm();
    if residual > STATIONARITY_TOL {
        return Err(Error::NoStationaryState);
    }
    Ok(eta)
}
