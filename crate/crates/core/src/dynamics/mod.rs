//! Stochastic single-atom propagation and the ensemble loading driver.

mod driver;
mod force;
mod injection;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use driver::{
    run_mot, run_mot_full, Event, EventKind, MotRun, MotTimeSeries, RunOptions, TrajectoryPoint,
};
pub use force::{net_force, scattering_rate_per_beam, step, ForceField, Integrator};
pub(crate) use force::gaussian3;
pub use injection::{flux_fraction_below, sample_injected_atom, InjectedAtom, NEAR_SURFACE_DISTANCE};

use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Membrane,
    Bridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomStatus {
    Active,
    LostSurface(SurfaceKind),
    LostBackground,
    Escaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub status: AtomStatus,
}

impl AtomState {
    pub fn new(position: Vec3, velocity: Vec3) -> Self {
        Self { position, velocity, status: AtomStatus::Active }
    }

    pub fn is_active(&self) -> bool {
        self.status == AtomStatus::Active
    }
}

/// Integration settings for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    /// s. The default 1 μs resolves the Doppler damping time (≳ 0.1 ms) and
    /// the sub-Doppler damping time (≈ 10 μs).
    pub dt: f64,
    pub max_time: f64,
    /// Atoms farther than this from the trap centre are `Escaped`.
    pub escape_radius: f64,
    pub rng_seed: u64,
}

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("configuration error: {0}")]
    Config(String),
}
