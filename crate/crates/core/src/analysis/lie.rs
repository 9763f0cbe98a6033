//! Rank of the Lie algebra generated by the drift and diffusion fields at a
//! pure state, with states written as real vectors in `ℝ^{n²−1}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PureStateVector, C64, I, ONE};
use crate::model::MeasurementModel;
use crate::sde::{diffusion_field, drift_field};

const DIFF_STEP: f64 = 1e-5;
const RANK_TOL: f64 = 1e-6;

/// Orthonormal basis (`Tr{E_k E_l} = δ_kl`) of the traceless Hermitian
/// `n×n` matrices: symmetric and antisymmetric off-diagonal pairs, then the
/// diagonal generators.
pub fn gell_mann_basis(n: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let unit = |i: usize, j: usize, z: C64| {
        ComplexMatrix::from_fn(n, |a, b| if a == i && b == j { z } else { C64::new(0.0, 0.0) })
    };
    let mut basis = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            basis.push(&unit(j, k, ONE * s) + &unit(k, j, ONE * s));
            basis.push(&unit(j, k, -I * s) + &unit(k, j, I * s));
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let diag: Vec<f64> = (0..n)
            .map(|k| match k.cmp(&l) {
                std::cmp::Ordering::Less => 1.0 / norm,
                std::cmp::Ordering::Equal => -(l as f64) / norm,
                std::cmp::Ordering::Greater => 0.0,
            })
            .collect();
        basis.push(ComplexMatrix::from_diagonal(&diag));
    }
    basis
}

#[derive(Clone, Debug)]
pub struct LieRankReport {
    pub rank: usize,
    /// `rank == 2(n − 1)`, the dimension of the pure-state manifold.
    pub full: bool,
    /// Singular values of the projected spanning set, descending.
    pub singular_values: Vec<f64>,
    /// Number of vector fields evaluated (generators and brackets).
    pub n_fields: usize,
}

/// A generator or an iterated bracket of generators.
#[derive(Clone, Debug)]
enum FieldExpr {
    Drift,
    Diffusion(usize),
    Bracket(Box<FieldExpr>, Box<FieldExpr>),
}

struct Fields<'a> {
    model: &'a MeasurementModel,
    n: usize,
    basis: Vec<ComplexMatrix>,
}

impl Fields<'_> {
    /// `1/n + Σ x_k E_k`
    fn state(&self, x: &DVector<f64>) -> ComplexMatrix {
        let mut rho = ComplexMatrix::identity(self.n).scale_real(1.0 / self.n as f64);
        rho += &self.tangent(x);
        rho
    }

    /// `Σ v_k E_k`
    fn tangent(&self, v: &DVector<f64>) -> ComplexMatrix {
        let mut tau = ComplexMatrix::zeros(self.n);
        for (e, &vk) in self.basis.iter().zip(v.iter()) {
            tau.axpy(C64::new(vk, 0.0), e);
        }
        tau
    }

    /// Coordinates of a traceless Hermitian matrix.
    fn coords(&self, tau: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|e| (e * tau).trace().re))
    }

    /// `[X, Y](x) = DY(x)X(x) − DX(x)Y(x)`, with directional derivatives by
    /// central differences.
    fn eval(&self, f: &FieldExpr, x: &DVector<f64>) -> DVector<f64> {
        match f {
            FieldExpr::Drift => self.coords(&drift_field(self.model, &self.state(x))),
            FieldExpr::Diffusion(j) => self.coords(&diffusion_field(self.model, &self.state(x), *j)),
            FieldExpr::Bracket(a, b) => {
                let h = DIFF_STEP;
                let av = self.eval(a, x);
                let bv = self.eval(b, x);
                let db_a = (self.eval(b, &(x + &av * h)) - self.eval(b, &(x - &av * h))) / (2.0 * h);
                let da_b = (self.eval(a, &(x + &bv * h)) - self.eval(a, &(x - &bv * h))) / (2.0 * h);
                db_a - da_b
            }
        }
    }
}

/// Evaluates `𝓐`, the `𝓑_j` and their right-nested brackets up to
/// `max_depth` at `|ψ⟩⟨ψ|`, projects them onto the tangent space
/// `T_ρ = {τ = τ*, ρτ + τρ = τ}` and returns the rank of their span.
pub fn lie_rank_check(m: &MeasurementModel, psi: &PureStateVector, max_depth: usize) -> Result<LieRankReport> {
    if m.diffusive_ops().is_empty() {
        return Err(Error::NoDiffusiveChannels);
    }
    if psi.dim() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: psi.dim() });
    }
    let n = m.dim();
    let fields = Fields { model: m, n, basis: gell_mann_basis(n) };

    let generators: Vec<FieldExpr> =
        std::iter::once(FieldExpr::Drift).chain((0..m.diffusive_ops().len()).map(FieldExpr::Diffusion)).collect();
    let mut all = generators.clone();
    let mut level = generators.clone();
    for _ in 0..max_depth {
        level = generators
            .iter()
            .flat_map(|g| level.iter().map(move |f| FieldExpr::Bracket(Box::new(g.clone()), Box::new(f.clone()))))
            .collect();
        all.extend(level.iter().cloned());
    }

    let rho = psi.projector().into_matrix();
    let x0 = fields.coords(&(&rho - &ComplexMatrix::identity(n).scale_real(1.0 / n as f64)));
    // P(τ) = ρτ + τρ − 2ρτρ is the orthogonal projection onto T_ρ.
    let project = |tau: &ComplexMatrix| -> ComplexMatrix {
        let rt = &rho * tau;
        let sum = &rt + &(tau * &rho);
        &sum - &(&rt * &rho).scale_real(2.0)
    };
    let columns: Vec<DVector<f64>> =
        all.iter().map(|f| fields.coords(&project(&fields.tangent(&fields.eval(f, &x0))))).collect();
    let mat = DMatrix::from_columns(&columns);
    let mut singular_values: Vec<f64> = mat.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let rank = singular_values.iter().filter(|&&s| s > RANK_TOL).count();
    Ok(LieRankReport { rank, full: rank == 2 * (n - 1), singular_values, n_fields: all.len() })
}
