//! Trajectory integrators: the linear equation for unnormalized states under
//! the reference law, the nonlinear a-posteriori equation under the physical
//! law, the pure-state Stratonovich form, the deterministic contraction flow,
//! and parallel ensembles of these.
//!
//! Each trajectory owns a counter-based generator seeded with
//! `seed + trajectory index`, so results do not depend on thread count.
//! Every step draws the Gaussian increments first and then one uniform per
//! jump channel. The engine computes *a* numerical solution of the stated
//! scheme; at fixed `dt` and seed it is unambiguous.

mod ensemble;
mod grid;
mod kernel;
mod stratonovich;
mod trajectory;

pub use ensemble::{run_ensemble, run_ensemble_with, thread_cap, EnsembleOptions, EnsembleStats, Mode};
pub use grid::TimeGrid;
pub use kernel::Scheme;
pub use stratonovich::{
    deterministic_flow, deterministic_flow_with, diffusion_field, drift_field, simulate_stratonovich_pure,
    simulate_stratonovich_pure_with, FlowResult, DEFAULT_FLOW_POINTS,
};
pub use trajectory::{
    simulate_linear, simulate_linear_with, simulate_posterior, simulate_posterior_with, trajectory_rng, JumpEvent,
    LinearTrajectory, OutputRecord, PosteriorTrajectory, SimOptions, RNG_NAME,
};
