use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::matrix::{ComplexMatrix, C64, ZERO};
use super::policy::NumericPolicy;
use crate::error::{Error, Result};

/// One eigenpair of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: DVector<C64>,
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in descending
/// order and orthonormal eigenvectors.
pub fn spectral_decomposition(a: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let tol = NumericPolicy::default().eig_hermitian_tol * a.dim() as f64;
    let defect = a.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(hermitian_eigen(&a.hermitize()))
}

/// Eigendecomposition of a matrix already known to be Hermitian. Only the
/// Hermitian part is read.
pub(crate) fn hermitian_eigen(h: &ComplexMatrix) -> Vec<EigenPair> {
    if h.dim() == 2 {
        return eigen_2x2(h);
    }
    let eig = SymmetricEigen::new(h.inner().clone());
    let mut pairs: Vec<EigenPair> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &value)| EigenPair { value, vector: eig.eigenvectors.column(k).into_owned() })
        .collect();
    pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
    pairs
}

fn eigen_2x2(h: &ComplexMatrix) -> Vec<EigenPair> {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = 0.5 * (h.get(0, 1) + h.get(1, 0).conj());
    let mean = 0.5 * (a + d);
    let half_gap = 0.5 * (a - d);
    let r = (half_gap * half_gap + b.norm_sqr()).sqrt();
    let (hi, lo) = (mean + r, mean - r);
    let top = if b.norm_sqr() == 0.0 {
        if a >= d {
            DVector::from_vec(vec![C64::new(1.0, 0.0), ZERO])
        } else {
            DVector::from_vec(vec![ZERO, C64::new(1.0, 0.0)])
        }
    } else if a >= d {
        DVector::from_vec(vec![C64::new(hi - d, 0.0), b.conj()])
    } else {
        DVector::from_vec(vec![b, C64::new(hi - a, 0.0)])
    };
    let top = top.normalize();
    let bottom = DVector::from_vec(vec![-top[1].conj(), top[0].conj()]);
    vec![EigenPair { value: hi, vector: top }, EigenPair { value: lo, vector: bottom }]
}

/// `Σ λ |u><u|`
pub(crate) fn reconstruct(n: usize, pairs: impl IntoIterator<Item = (f64, DVector<C64>)>) -> ComplexMatrix {
    let mut acc = DMatrix::<C64>::zeros(n, n);
    for (lambda, u) in pairs {
        if lambda != 0.0 {
            acc += (&u * u.adjoint()) * C64::new(lambda, 0.0);
        }
    }
    ComplexMatrix::try_from_dmatrix(acc).expect("square by construction")
}

/// Euclidean projection of `values` onto `{w ≥ 0, Σ w = radius}`.
pub fn simplex_projection(values: &[f64], radius: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - radius) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    values.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> f64 {
    a.singular_values().iter().sum()
}

/// `⟨a, b⟩ = Tr{a* b}`
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_same_dim(b)?;
    Ok(a.inner().iter().zip(b.inner().iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn matrix_exp(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.dim();
    let norm1 = (0..n).map(|j| (0..n).map(|i| a.get(i, j).norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale_real(0.5f64.powi(squarings));
    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    for k in 1..=40 {
        term = (&term * &scaled).scale_real(1.0 / k as f64);
        sum += &term;
        if term.hs_norm() <= 1e-18 * sum.hs_norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `e^{a t} v`
pub fn matrix_exp_action(a: &ComplexMatrix, t: f64, v: &DVector<C64>) -> Result<DVector<C64>> {
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite time {t}")));
    }
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: v.len() });
    }
    Ok(matrix_exp(&a.scale_real(t)).apply(v))
}
