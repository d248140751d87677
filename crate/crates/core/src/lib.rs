//! Monte Carlo simulation and analysis of a magneto-optical trap (MOT) formed
//! inside a sub-millimetre hole of a transparent membrane.
//!
//! The crate is organised around the measurement pipeline of a membrane MOT
//! experiment:
//!
//! * [`scene`] describes the atoms, cooling beams, membrane device, quadrupole
//!   field and vapour source, and answers geometric and field queries.
//! * [`dynamics`] propagates single atoms under the scattering force, recoil
//!   noise, gravity and loss channels, and drives ensemble loading runs.
//! * [`cooling`] applies a polarization-gradient (sub-Doppler) stage to a
//!   trapped cloud.
//! * [`measure`] provides region counting, cloud sizes and time-of-flight
//!   expansion with membrane shadowing.
//! * [`fit`] turns time series into loading rates, lifetimes, temperatures,
//!   power-law exponents and capture velocities.
//! * [`io`] reads and writes the CSV formats used by the command-line tool.

pub mod constants;
pub mod cooling;
pub mod dynamics;
pub mod fit;
pub mod io;
pub mod measure;
pub mod rng;
pub mod scene;

/// Version of this crate, embedded in run summaries.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Three-vector used for positions (m), velocities (m/s), forces (N) and fields (T).
pub type Vec3 = nalgebra::Vector3<f64>;

pub use cooling::{PgModelParams, PgSchedule};
pub use dynamics::{AtomState, AtomStatus, MotTimeSeries, StepParams, SurfaceKind};
pub use fit::{CaptureResult, DecayFit, FitError, LoadingFit, PowerLawFit, TofFit};
pub use measure::{Cloud, Region, TofSeries};
pub use scene::{
    AtomSpecies, Beam, MembraneDevice, QuadrupoleField, Scenario, ScenarioError, VaporSource,
};
