use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::decomp::{hermitian_eigen, reconstruct, simplex_projection};
use super::matrix::{ComplexMatrix, C64, ZERO};
use super::policy::NumericPolicy;
use crate::error::{Error, Result};

/// Density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    matrix: ComplexMatrix,
    purity_tol: f64,
}

impl QuantumState {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_policy(matrix, &NumericPolicy::default())
    }

    pub fn with_policy(matrix: ComplexMatrix, policy: &NumericPolicy) -> Result<Self> {
        let n = matrix.dim() as f64;
        let defect = matrix.hermiticity_defect();
        if defect > policy.state_hermitian_tol * n {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {defect:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > policy.state_trace_tol || tr.im.abs() > policy.state_trace_tol {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigen(&matrix.hermitize()).last().map(|p| p.value).unwrap_or(0.0);
        if min_eig < -policy.state_psd_tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { matrix, purity_tol: policy.purity_tol })
    }

    /// Wraps a matrix that is a state by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix, purity_tol: NumericPolicy::default().purity_tol }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::from_trusted(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    /// `|e_k><e_k|`
    pub fn basis(n: usize, k: usize) -> Self {
        PureStateVector::basis(n, k).projector()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn purity_tol(&self) -> f64 {
        self.purity_tol
    }

    /// `Tr{ρ(1−ρ)}`
    pub fn linear_entropy(&self) -> f64 {
        let purity: f64 = self.matrix.inner().iter().map(|z| z.norm_sqr()).sum();
        (1.0 - purity).max(0.0)
    }

    pub fn is_pure(&self) -> bool {
        self.linear_entropy() <= self.purity_tol
    }

    /// `⟨a, ρ⟩ = Tr{a* ρ}`
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<C64> {
        super::hs_inner(a, &self.matrix)
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn dominant_vector(&self) -> PureStateVector {
        let pairs = hermitian_eigen(&self.matrix);
        PureStateVector::from_trusted(pairs[0].vector.clone())
    }
}

/// Unit vector of the Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector(DVector<C64>);

impl PureStateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty vector".into()));
        }
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > NumericPolicy::default().vector_norm_tol {
            return Err(Error::InvalidState(format!("vector norm {norm} is not 1")));
        }
        Ok(Self(v))
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self(v / C64::new(norm, 0.0)))
    }

    pub(crate) fn from_trusted(v: DVector<C64>) -> Self {
        Self(v)
    }

    pub fn basis(n: usize, k: usize) -> Self {
        assert!(k < n, "basis index out of range");
        let mut v = DVector::from_element(n, ZERO);
        v[k] = C64::new(1.0, 0.0);
        Self(v)
    }

    /// Haar-random pure state: normalized vector of independent standard
    /// complex Gaussians.
    pub fn haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let v: Vec<C64> =
                (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
            if let Ok(psi) = Self::normalized(v) {
                return psi;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn projector(&self) -> QuantumState {
        QuantumState::from_trusted(ComplexMatrix::outer(&self.0, &self.0))
    }
}

/// Nearest state: Hermitize, then replace the spectrum by its Euclidean
/// projection onto the probability simplex, keeping the eigenbasis.
pub fn project_to_state(a: &ComplexMatrix) -> Result<QuantumState> {
    if !a.is_finite() {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let h = a.hermitize();
    let pairs = hermitian_eigen(&h);
    if pairs.iter().all(|p| p.value <= -1.0) {
        return Err(Error::ZeroTrace);
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let projected = simplex_projection(&values, 1.0);
    let m = reconstruct(h.dim(), projected.into_iter().zip(pairs.into_iter().map(|p| p.vector)));
    Ok(QuantumState::from_trusted(m))
}

/// Positivity repair for unnormalized trace-class elements: Hermitize and
/// project the spectrum onto the nonnegative simplex of the same trace.
/// The trace is left untouched.
pub fn repair_positive(a: &ComplexMatrix) -> ComplexMatrix {
    let h = a.hermitize();
    let pairs = hermitian_eigen(&h);
    if pairs.last().map(|p| p.value >= 0.0).unwrap_or(true) {
        return h;
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return ComplexMatrix::zeros(h.dim());
    }
    let projected = simplex_projection(&values, total);
    reconstruct(h.dim(), projected.into_iter().zip(pairs.into_iter().map(|p| p.vector)))
}
