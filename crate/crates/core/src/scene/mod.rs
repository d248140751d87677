//! Physical scene: species, beams, membrane device, quadrupole field and
//! vapour source, plus the pure geometric and field queries on them.

mod beam;
mod config;
mod field;
mod membrane;
mod species;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use beam::{beam_intensity, restoring_polarization, six_beam_set, Beam};
pub use config::{
    apply_override, load_scenario, load_scenario_with_overrides, paper_scenario_document,
    parse_override, PaperScenario, ScenarioDocument, PAPER_INJECTION_RATE, PAPER_SCENARIOS,
    PAPER_TRUNCATION_SPEED,
};
pub use field::{magnetic_field, QuadrupoleField};
pub use membrane::{Hit, MembraneDevice, PlaneZone};
pub use species::AtomSpecies;

use crate::cooling::{PgModelParams, PgSchedule};
use crate::dynamics::StepParams;
use crate::Vec3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("override error: {0}")]
    Override(String),
}

/// Thermal vapour feeding the trap through a spherical injection surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaporSource {
    /// K
    pub temperature: f64,
    /// Mean Poisson rate of simulated candidate atoms crossing the injection sphere, 1/s.
    pub injection_rate: f64,
    /// m
    pub injection_radius: f64,
    /// Weight multiplier for atoms injected within 300 μm of solid membrane.
    pub near_surface_density_factor: f64,
    /// Upper end of the sampled speed range, m/s. `None` samples the full
    /// flux distribution.
    pub truncation_speed: Option<f64>,
}

impl VaporSource {
    fn validate(&self) -> Result<(), String> {
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err("vapor.temperature must be > 0".into());
        }
        if !(self.injection_rate >= 0.0 && self.injection_rate.is_finite()) {
            return Err("vapor.injection_rate must be >= 0".into());
        }
        if !(self.injection_radius > 0.0) {
            return Err("vapor.injection_radius must be > 0".into());
        }
        if !(self.near_surface_density_factor > 0.0 && self.near_surface_density_factor <= 1.0) {
            return Err("vapor.near_surface_density_factor must be in (0, 1]".into());
        }
        if let Some(v) = self.truncation_speed {
            if !(v > 0.0) {
                return Err(format!("vapor.truncation_speed must be > 0 (got {v})"));
            }
        }
        Ok(())
    }
}

/// How the saturation term of the two-level scattering rate is shared between beams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationModel {
    /// Each beam saturates on its own intensity: `1 + s_i` in the denominator.
    Independent,
    /// All beams share `1 + Σ s_j`, capping the total rate at Γ/2.
    Shared,
}

/// Choices of force model during the MOT stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceModel {
    pub saturation: SaturationModel,
    /// Adds the sub-Doppler friction/diffusion closure to the MOT stage.
    pub mot_sub_doppler: bool,
    /// Sub-Doppler closure shared by the MOT and PG stages.
    pub sub_doppler: PgModelParams,
    /// In the MOT stage the sub-Doppler friction damps towards the velocity
    /// at which the ground-state Larmor shift is Doppler compensated. This is
    /// that Larmor shift as a fraction of `effective_zeeman_shift` (g_F = 1/4
    /// for Cs F = 4 against a unit effective moment). Zero disables it.
    pub mot_sub_doppler_zeeman_ratio: f64,
}

/// Integration and sampling settings for loading runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    /// s
    pub dt: f64,
    /// s
    pub max_time: f64,
    /// Number of evenly spaced sample times in [0, max_time].
    pub sample_count: usize,
    /// Defaults to twice the injection radius.
    pub escape_radius: Option<f64>,
}

/// Complete, validated description of one virtual experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub species: AtomSpecies,
    pub beams: Vec<Beam>,
    /// `None` is a free-space MOT.
    pub device: Option<MembraneDevice>,
    pub quad: QuadrupoleField,
    pub vapor: VaporSource,
    /// 1/s
    pub background_loss_rate: f64,
    /// m/s²
    pub gravity: Vec3,
    pub force_model: ForceModel,
    pub pg_schedule: PgSchedule,
    pub run: RunSettings,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let v = |r: Result<(), String>| r.map_err(ScenarioError::Validation);
        v(self.species.validate())?;
        if self.beams.is_empty() {
            return Err(ScenarioError::Validation("at least one beam is required".into()));
        }
        for (i, b) in self.beams.iter().enumerate() {
            v(b.validate(i))?;
        }
        if let Some(dev) = &self.device {
            v(dev.validate())?;
        }
        v(self.quad.validate())?;
        v(self.vapor.validate())?;
        if !(self.background_loss_rate >= 0.0 && self.background_loss_rate.is_finite()) {
            return Err(ScenarioError::Validation("losses.background_loss_rate must be >= 0".into()));
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return Err(ScenarioError::Validation("gravity must be finite".into()));
        }
        v(self.force_model.sub_doppler.validate())?;
        if !(self.force_model.mot_sub_doppler_zeeman_ratio >= 0.0) {
            return Err(ScenarioError::Validation("force_model.mot_sub_doppler_zeeman_ratio must be >= 0".into()));
        }
        v(self.pg_schedule.validate())?;
        let r = &self.run;
        if !(r.dt > 0.0 && r.max_time > 0.0 && r.sample_count >= 2) {
            return Err(ScenarioError::Validation(
                "run: require dt > 0, max_time > 0 and sample_count >= 2".into(),
            ));
        }
        if let Some(e) = r.escape_radius {
            if !(e > 0.0) {
                return Err(ScenarioError::Validation("run.escape_radius must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Non-fatal configuration concerns.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, b) in self.beams.iter().enumerate() {
            if b.detuning > 0.0 {
                out.push(format!("beams[{i}] is blue detuned; it heats rather than cools"));
            }
        }
        let d = self.pg_schedule.duration;
        if !(0.5e-3..=5e-3).contains(&d) {
            out.push(format!("pg.duration {:.3} ms is outside the usual 0.5-5 ms range", d * 1e3));
        }
        out
    }

    pub fn trap_center(&self) -> Vec3 {
        self.quad.center
    }

    /// Mean detuning of the cooling beams, rad/s.
    pub fn mot_detuning(&self) -> f64 {
        self.beams.iter().map(|b| b.detuning).sum::<f64>() / self.beams.len() as f64
    }

    pub fn escape_radius(&self) -> f64 {
        self.run.escape_radius.unwrap_or(2.0 * self.vapor.injection_radius)
    }

    pub fn step_params(&self, rng_seed: u64) -> StepParams {
        StepParams {
            dt: self.run.dt,
            max_time: self.run.max_time,
            escape_radius: self.escape_radius(),
            rng_seed,
        }
    }

    /// Total saturation parameter Σ I_i/I_sat at `point`.
    pub fn total_saturation(&self, point: &Vec3) -> f64 {
        self.beams
            .iter()
            .map(|b| beam_intensity(b, self.device.as_ref(), point))
            .sum::<f64>()
            / self.species.saturation_intensity
    }

    /// Free-space version of this scenario (device removed).
    pub fn without_device(&self) -> Self {
        Self { device: None, ..self.clone() }
    }

    pub fn paper(which: PaperScenario) -> Self {
        load_scenario(&paper_scenario_document(which).to_json()).expect("paper scenarios are valid")
    }
}
