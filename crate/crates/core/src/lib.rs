//! Quantum trajectories of continuously measured open systems.
//!
//! A [`model::MeasurementModel`] bundles a Hamiltonian, diffusive measurement
//! channels, unobserved dissipation and counting channels. From it:
//!
//! - [`master`] solves the master equation and finds stationary states;
//! - [`sde`] integrates the linear and a-posteriori stochastic equations,
//!   single paths or parallel ensembles;
//! - [`model`] checks structural properties (purity preservation,
//!   purification, ellipticity) and [`analysis`] the Lie-rank condition,
//!   ergodic averages and Bloch-sphere histograms;
//! - [`atom`] builds the driven two-level atom under homodyne, heterodyne or
//!   direct detection;
//! - [`io`] and [`cli`] write reproducible CSV output and drive everything
//!   from the `qtraj` binary.

pub mod analysis;
pub mod atom;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod master;
pub mod model;
pub mod sde;

pub use error::{Error, Result};
