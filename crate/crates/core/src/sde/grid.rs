use crate::error::{Error, Result};

/// Uniform discretization of `[0, t_final]` with `ceil(t_final/dt)` steps.
/// The last step is shortened so that the grid ends exactly at `t_final`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final >= dt) {
            return Err(Error::InvalidArgument(format!("t_final must be at least dt, got {t_final}")));
        }
        // Guard against 5.0/0.001 = 5000.000000000001.
        let ratio = t_final / dt;
        let n_steps = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) { ratio.round() } else { ratio.ceil() };
        Ok(Self { t_final, dt, n_steps: n_steps as usize })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn time(&self, i: usize) -> f64 {
        if i >= self.n_steps {
            self.t_final
        } else {
            (i as f64 * self.dt).min(self.t_final)
        }
    }

    /// Length of step `i` (from `t_i` to `t_{i+1}`).
    pub fn step_len(&self, i: usize) -> f64 {
        self.time(i + 1) - self.time(i)
    }

    /// Grid indices kept when recording every `every`-th step; the final
    /// index is always included.
    pub fn record_indices(&self, every: usize) -> Vec<usize> {
        let every = every.max(1);
        let mut idx: Vec<usize> = (0..=self.n_steps).step_by(every).collect();
        if *idx.last().expect("nonempty") != self.n_steps {
            idx.push(self.n_steps);
        }
        idx
    }
}
