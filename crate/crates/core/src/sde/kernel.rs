//! Single-step update rules shared by the trajectory integrators.

use std::cell::RefCell;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{matrix_exp, ComplexMatrix, C64, I};
use crate::model::MeasurementModel;

/// Integration scheme for the Itô equations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scheme {
    /// First-order weak scheme written as a completely positive map
    /// `ρ ↦ MρM* + dt Σ SρS*` followed by the jump maps, with
    /// `M = e^{a dt}(1 + Σ L_j dy_j + ½ Σ L_j L_k (dy_j dy_k − δ_jk dt))`.
    /// Positivity holds without repair and Hamiltonian evolution is exact.
    #[default]
    KrausEuler,
    /// Plain Euler–Maruyama on the Itô form, followed by positivity repair.
    EulerMaruyama,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::KrausEuler => "kraus-euler",
            Scheme::EulerMaruyama => "euler-maruyama",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "kraus-euler" => Ok(Self::KrausEuler),
            "euler-maruyama" => Ok(Self::EulerMaruyama),
            other => Err(crate::Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Random inputs of one step: Gaussian increments then one uniform per
/// jump channel, always drawn in that order.
pub(crate) struct Noise {
    pub dw: Vec<f64>,
    pub u: Vec<f64>,
}

impl Noise {
    pub fn new(n_diff: usize, n_jump: usize) -> Self {
        Self { dw: vec![0.0; n_diff], u: vec![0.0; n_jump] }
    }

    pub fn draw<R: Rng>(&mut self, rng: &mut R, dt: f64) {
        let s = dt.sqrt();
        for w in &mut self.dw {
            let z: f64 = rng.sample(StandardNormal);
            *w = z * s;
        }
        for u in &mut self.u {
            *u = rng.random::<f64>();
        }
    }
}

/// Operators of a model rearranged for fast stepping.
pub(crate) struct Kernel<'a> {
    pub model: &'a MeasurementModel,
    pub n: usize,
    /// `−iH − ½(D₁+D₂+D₃)`
    pub a_post: ComplexMatrix,
    /// `a_post + ½ν(𝒴)`
    pub a_lin: ComplexMatrix,
    pub l: Vec<ComplexMatrix>,
    pub l_adj: Vec<ComplexMatrix>,
    /// `L_j + L_j*`
    pub x: Vec<ComplexMatrix>,
    /// `L_j L_k`, row-major over `(j, k)`
    pub ll: Vec<ComplexMatrix>,
    pub s: Vec<ComplexMatrix>,
    pub s_adj: Vec<ComplexMatrix>,
    /// `e^{a dt}` for the step lengths seen so far, keyed by `(dt, linear)`.
    exp_cache: RefCell<Vec<(f64, bool, ComplexMatrix)>>,
}

impl<'a> Kernel<'a> {
    pub fn new(m: &'a MeasurementModel) -> Self {
        let n = m.dim();
        let d = &(m.d1() + m.d2()) + m.d3();
        let a_post = &m.hamiltonian().scale(-I) - &d.scale_real(0.5);
        let mut a_lin = a_post.clone();
        a_lin.axpy(C64::new(0.5 * m.total_jump_mass(), 0.0), &ComplexMatrix::identity(n));
        let l = m.diffusive_ops().to_vec();
        let l_adj: Vec<_> = l.iter().map(ComplexMatrix::adjoint).collect();
        let x = l.iter().zip(&l_adj).map(|(a, b)| a + b).collect();
        let ll = l.iter().flat_map(|a| l.iter().map(move |b| a * b)).collect();
        let s = m.dissipative_ops().to_vec();
        let s_adj = s.iter().map(ComplexMatrix::adjoint).collect();
        Self { model: m, n, a_post, a_lin, l, l_adj, x, ll, s, s_adj, exp_cache: RefCell::new(Vec::new()) }
    }

    pub fn n_diff(&self) -> usize {
        self.l.len()
    }

    pub fn n_jump(&self) -> usize {
        self.model.jump_channels().len()
    }

    /// `m_j = Tr{(L_j + L_j*)ρ}`
    pub fn drift(&self, rho: &ComplexMatrix, j: usize) -> f64 {
        trace_product(&self.x[j], rho).re
    }

    /// `λ_k = Tr{𝒥*[1](y_k) ρ}`, clamped at zero.
    pub fn intensity(&self, rho: &ComplexMatrix, k: usize) -> f64 {
        trace_product(self.model.jump_channels()[k].effect(), rho).re.max(0.0)
    }

    /// `M = e^{a dt}(1 + Σ L_j dy_j + ½ Σ L_j L_k (dy_j dy_k − δ_jk dt))` with
    /// `a` the linear (`linear = true`) or normalized drift operator.
    pub fn kraus_step_operator(&self, linear: bool, dy: &[f64], dt: f64) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(self.n);
        let p = self.l.len();
        for j in 0..p {
            m.axpy(C64::new(dy[j], 0.0), &self.l[j]);
            for k in 0..p {
                let c = dy[j] * dy[k] - if j == k { dt } else { 0.0 };
                m.axpy(C64::new(0.5 * c, 0.0), &self.ll[j * p + k]);
            }
        }
        &self.drift_propagator(linear, dt) * &m
    }

    fn drift_propagator(&self, linear: bool, dt: f64) -> ComplexMatrix {
        let mut cache = self.exp_cache.borrow_mut();
        if let Some((_, _, e)) = cache.iter().find(|(h, lin, _)| *h == dt && *lin == linear) {
            return e.clone();
        }
        let a = if linear { &self.a_lin } else { &self.a_post };
        let e = matrix_exp(&a.scale_real(dt));
        cache.push((dt, linear, e.clone()));
        e
    }

    /// `M ρ M* + dt Σ S ρ S*`
    pub fn kraus_apply(&self, m: &ComplexMatrix, rho: &ComplexMatrix, dt: f64) -> ComplexMatrix {
        let mut out = &(m * rho) * &m.adjoint();
        for (s, sd) in self.s.iter().zip(&self.s_adj) {
            out.axpy(C64::new(dt, 0.0), &(&(s * rho) * sd));
        }
        out
    }

    /// `L_j ρ + ρ L_j*`
    pub fn diffusion(&self, rho: &ComplexMatrix, j: usize) -> ComplexMatrix {
        &(&self.l[j] * rho) + &(rho * &self.l_adj[j])
    }
}

/// `Tr{a b}` without forming the product.
pub(crate) fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let (a, b) = (a.inner(), b.inner());
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Number of substeps needed so that `bound · dt / r ≤ 0.1`.
pub(crate) fn substeps_for(bound: f64, dt: f64) -> usize {
    let x = bound * dt;
    if x <= 0.1 {
        1
    } else {
        (x / 0.1).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli::*;
    use crate::model::{apply_k, ModelBuilder};

    #[test]
    fn kraus_map_expands_to_k_generator() {
        let m = ModelBuilder::new(2)
            .hamiltonian(&sigma_x())
            .diffusive(&sigma_minus())
            .dissipative(&sigma_z().scale_real(0.3))
            .jump_channel("c", 0.5, &[sigma_plus()])
            .build()
            .unwrap();
        let k = Kernel::new(&m);
        let rho = ComplexMatrix::from_diagonal(&[0.25, 0.75]);
        let dt: f64 = 1e-6;
        // Averaging over dy = ±√dt gives E[dy²] = dt, so the mean map is
        // σ + 𝓚[σ]dt + O(dt²).
        let mut avg = ComplexMatrix::zeros(2);
        for dy in [dt.sqrt(), -dt.sqrt()] {
            let op = k.kraus_step_operator(true, &[dy], dt);
            avg.axpy(C64::new(0.5, 0.0), &k.kraus_apply(&op, &rho, dt));
        }
        let deriv = (&avg - &rho).scale_real(1.0 / dt);
        let expected = apply_k(&m, &rho).unwrap();
        assert!((deriv - expected).hs_norm() < 1e-5);
    }

    #[test]
    fn substep_counts() {
        assert_eq!(substeps_for(1.0, 0.1), 1);
        assert_eq!(substeps_for(10.0, 0.1), 10);
        assert_eq!(substeps_for(0.0, 5.0), 1);
    }

    #[test]
    fn trace_product_matches_product() {
        let a = &sigma_x() + &sigma_minus().scale(I);
        let b = &sigma_z() + &sigma_plus();
        assert!((trace_product(&a, &b) - (&a * &b).trace()).norm() < 1e-15);
    }
}
