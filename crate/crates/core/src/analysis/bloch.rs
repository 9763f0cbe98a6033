use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::window;
use crate::error::{Error, Result};
use crate::linalg::QuantumState;
use crate::sde::PosteriorTrajectory;

/// States with larger linear entropy are binned by the direction of their
/// Bloch vector (equivalently their dominant eigenvector) and counted as
/// mixed.
pub const MIXED_STATE_ENTROPY: f64 = 0.05;

/// `(x, y, z)` with `ρ = ½(1 + xσ_x + yσ_y + zσ_z)`.
pub fn bloch_vector(rho: &QuantumState) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionNotTwo(rho.dim()));
    }
    let m = rho.matrix();
    let off = m.get(0, 1);
    Ok([2.0 * off.re, -2.0 * off.im, (m.get(0, 0) - m.get(1, 1)).re])
}

fn direction(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if r < 1e-12 {
        [0.0, 0.0, 1.0]
    } else {
        [v[0] / r, v[1] / r, v[2] / r]
    }
}

/// Dwell-time weighted occupation of equal-angle `(θ, φ)` cells of the
/// Bloch sphere. `θ ∈ [0, π]` is measured from the excited state, `φ ∈ [0, 2π)`
/// from the `x` axis.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochHistogram {
    pub n_polar: usize,
    pub n_azimuth: usize,
    /// `[θ index][φ index]`
    pub counts: Vec<Vec<u64>>,
    pub dwell_time: Vec<Vec<f64>>,
    pub total: u64,
    /// Samples whose linear entropy exceeded [`MIXED_STATE_ENTROPY`].
    pub mixed_samples: u64,
}

impl BlochHistogram {
    pub fn new(n_polar: usize, n_azimuth: usize) -> Result<Self> {
        if n_polar == 0 || n_azimuth == 0 {
            return Err(Error::InvalidArgument("histogram needs at least one bin per axis".into()));
        }
        Ok(Self {
            n_polar,
            n_azimuth,
            counts: vec![vec![0; n_azimuth]; n_polar],
            dwell_time: vec![vec![0.0; n_azimuth]; n_polar],
            total: 0,
            mixed_samples: 0,
        })
    }

    pub fn bin_of(&self, v: [f64; 3]) -> (usize, usize) {
        let [x, y, z] = direction(v);
        let theta = z.clamp(-1.0, 1.0).acos();
        let mut phi = y.atan2(x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let i = ((theta / PI * self.n_polar as f64) as usize).min(self.n_polar - 1);
        let j = ((phi / (2.0 * PI) * self.n_azimuth as f64) as usize).min(self.n_azimuth - 1);
        (i, j)
    }

    pub fn add(&mut self, v: [f64; 3], dwell: f64) {
        let (i, j) = self.bin_of(v);
        self.counts[i][j] += 1;
        self.dwell_time[i][j] += dwell;
        self.total += 1;
    }

    /// Adds another histogram on the same grid.
    pub fn merge(&mut self, other: &BlochHistogram) -> Result<()> {
        if (self.n_polar, self.n_azimuth) != (other.n_polar, other.n_azimuth) {
            return Err(Error::InvalidArgument("histogram grids differ".into()));
        }
        for i in 0..self.n_polar {
            for j in 0..self.n_azimuth {
                self.counts[i][j] += other.counts[i][j];
                self.dwell_time[i][j] += other.dwell_time[i][j];
            }
        }
        self.total += other.total;
        self.mixed_samples += other.mixed_samples;
        Ok(())
    }

    pub fn total_dwell(&self) -> f64 {
        self.dwell_time.iter().flatten().sum()
    }

    pub fn occupied_bins(&self) -> usize {
        self.counts.iter().flatten().filter(|&&c| c > 0).count()
    }

    /// Dwell-time distribution, normalized to one.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total_dwell();
        self.dwell_time.iter().flatten().map(|d| if total > 0.0 { d / total } else { 0.0 }).collect()
    }

    /// `½ Σ |p − q|` between the normalized dwell distributions.
    pub fn total_variation(&self, other: &BlochHistogram) -> Result<f64> {
        if (self.n_polar, self.n_azimuth) != (other.n_polar, other.n_azimuth) {
            return Err(Error::InvalidArgument("histogram grids differ".into()));
        }
        Ok(0.5 * self.probabilities().iter().zip(other.probabilities()).map(|(p, q)| (p - q).abs()).sum::<f64>())
    }
}

/// Bloch vectors and trapezoid dwell weights of the samples after `burn_in`.
fn weighted_points(traj: &PosteriorTrajectory, burn_in: f64) -> Result<Vec<([f64; 3], f64, bool)>> {
    let dim = traj.state_path[0].dim();
    if dim != 2 {
        return Err(Error::DimensionNotTwo(dim));
    }
    let (idx, w) = window(traj, burn_in)?;
    idx.iter()
        .zip(w)
        .map(|(&i, wi)| {
            let rho = &traj.state_path[i];
            Ok((bloch_vector(rho)?, wi, rho.linear_entropy() > MIXED_STATE_ENTROPY))
        })
        .collect()
}

/// Empirical surrogate of the invariant measure: the dwell time of the
/// trajectory in each Bloch-sphere cell after `burn_in`.
pub fn empirical_invariant_measure(
    traj: &PosteriorTrajectory,
    grid: (usize, usize),
    burn_in: f64,
) -> Result<BlochHistogram> {
    let mut hist = BlochHistogram::new(grid.0, grid.1)?;
    for (v, w, mixed) in weighted_points(traj, burn_in)? {
        hist.add(v, w);
        hist.mixed_samples += mixed as u64;
    }
    Ok(hist)
}

/// Best-fitting great circle through the visited Bloch directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreatCircleFit {
    /// Unit normal of the fitted plane through the origin.
    pub normal: [f64; 3],
    pub half_width: f64,
    /// Fraction of dwell time within angular distance `half_width` of the
    /// circle.
    pub fraction_within: f64,
}

/// Fits the plane through the origin minimizing the dwell-weighted squared
/// distance of the Bloch directions (smallest eigenvector of the weighted
/// scatter matrix) and measures the dwell fraction within `half_width`
/// radians of the corresponding great circle.
pub fn great_circle_concentration(traj: &PosteriorTrajectory, burn_in: f64, half_width: f64) -> Result<GreatCircleFit> {
    let pts = weighted_points(traj, burn_in)?;
    let mut scatter = Matrix3::<f64>::zeros();
    for (v, w, _) in &pts {
        let d = Vector3::from(direction(*v));
        scatter += d * d.transpose() * *w;
    }
    let eig = scatter.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let n = eig.eigenvectors.column(k).normalize();
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let within: f64 = pts
        .iter()
        .filter(|(v, _, _)| Vector3::from(direction(*v)).dot(&n).clamp(-1.0, 1.0).asin().abs() <= half_width)
        .map(|p| p.1)
        .sum();
    Ok(GreatCircleFit { normal: [n[0], n[1], n[2]], half_width, fraction_within: within / total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::tests::constant_trajectory;
    use crate::linalg::{PureStateVector, C64};

    #[test]
    fn bloch_vectors_of_basis_states() {
        assert_eq!(bloch_vector(&QuantumState::basis(2, 0)).unwrap(), [0.0, 0.0, 1.0]);
        assert_eq!(bloch_vector(&QuantumState::basis(2, 1)).unwrap(), [0.0, 0.0, -1.0]);
        let plus_i = PureStateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)]).unwrap().projector();
        let v = bloch_vector(&plus_i).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15 && v[2].abs() < 1e-15);
        assert!(bloch_vector(&QuantumState::maximally_mixed(3)).is_err());
    }

    #[test]
    fn constant_trajectory_fills_one_bin() {
        let psi = PureStateVector::normalized(vec![C64::new(0.8, 0.0), C64::new(0.36, 0.48)]).unwrap();
        let traj = constant_trajectory(&psi.projector(), 2.0, 0.01);
        let h = empirical_invariant_measure(&traj, (12, 24), 0.5).unwrap();
        assert_eq!(h.occupied_bins(), 1);
        assert_eq!(h.total, h.counts.iter().flatten().sum::<u64>());
        assert!((h.total_dwell() - 1.5).abs() < 1e-12);
        assert_eq!(h.mixed_samples, 0);
    }

    #[test]
    fn bins_cover_the_sphere() {
        let h = BlochHistogram::new(4, 8).unwrap();
        assert_eq!(h.bin_of([0.0, 0.0, 1.0]), (0, 0));
        assert_eq!(h.bin_of([0.0, 0.0, -1.0]), (3, 0));
        assert_eq!(h.bin_of([1.0, -1e-12, 0.0]).1, 7);
        assert_eq!(h.bin_of([-1.0, 0.0, 0.0]), (2, 4));
    }

    #[test]
    fn total_variation_bounds() {
        let mut a = BlochHistogram::new(2, 2).unwrap();
        let mut b = BlochHistogram::new(2, 2).unwrap();
        a.add([0.0, 0.0, 1.0], 1.0);
        b.add([0.0, 0.0, -1.0], 1.0);
        assert_eq!(a.total_variation(&b).unwrap(), 1.0);
        assert_eq!(a.total_variation(&a).unwrap(), 0.0);
        a.merge(&b).unwrap();
        assert_eq!(a.total, 2);
    }

    #[test]
    fn great_circle_of_equatorial_states() {
        let psi = PureStateVector::normalized(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        let traj = constant_trajectory(&psi.projector(), 1.0, 0.1);
        let fit = great_circle_concentration(&traj, 0.0, 0.1).unwrap();
        assert_eq!(fit.fraction_within, 1.0);
    }
}
