//! Two-level CubeSat orbit-correction toolkit.
//!
//! The high level plans impulsive maneuver sequences that recruit the J2
//! nodal drift to absorb plane and phase errors cheaply; the low level is a
//! from-scratch LSTM that corrects each burn in real time using a Kalman
//! estimate of the spacecraft state and thrust pointing bias. A batch
//! simulation harness measures miss distance against pointing accuracy in
//! paired open-loop/closed-loop Monte Carlo runs.
//!
//! Module map:
//! - [`elements`], [`dynamics`], [`disturbance`], [`propagate`]: orbital
//!   mechanics core (element conversions, J2 secular rates, Gauss
//!   variational control coupling, RK4 propagation, impulses).
//! - [`planner`]: the J2-assisted four-burn transfer design.
//! - [`estimator`]: discrete Kalman filter for element deviations and
//!   thrust pointing bias.
//! - [`neural`]: stacked LSTM (and GRU baseline) with BPTT, Adam, gradient
//!   clipping and k-fold cross-validated training.
//! - [`sim`]: shooting-method labeling oracle, dataset generation, miss
//!   distance and the Monte Carlo study.
//! - [`cli`]: batch subcommands gluing the pipeline together.

pub mod cli;
pub mod config;
pub mod constants;
pub mod disturbance;
pub mod dynamics;
pub mod elements;
pub mod error;
pub mod estimator;
pub mod lvlh;
pub mod neural;
pub mod planner;
pub mod propagate;
pub mod sim;

pub use constants::PhysicalConstants;
pub use elements::{CartesianState, OrbitalElements};
pub use error::{Error, Result};
pub use lvlh::LvlhImpulse;
