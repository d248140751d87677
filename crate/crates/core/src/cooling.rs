//! Polarization-gradient (sub-Doppler) cooling as a friction–diffusion closure.
//!
//! Inside a velocity window of width `capture_velocity` the light exerts a
//! linear friction `−γ v` with `γ = friction_coefficient_scale · ħk²`, scaled
//! by the onset factor `s/(1+s)` so that it vanishes in the dark. The paired
//! momentum diffusion is chosen so that the Langevin equilibrium satisfies
//! `k_B T_eq = C_pg · ħΓ · s / |δ/Γ|`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::{BOLTZMANN, HBAR};
use crate::dynamics::{AtomStatus, StepParams};
use crate::measure::{Cloud, CloudAtom};
use crate::rng::substream;
use crate::scene::{AtomSpecies, Scenario};
use crate::Vec3;

#[derive(Debug, Error, PartialEq)]
pub enum CoolingError {
    #[error("time {t} s is outside the schedule [0, {duration}] s")]
    OutsideSchedule { t: f64, duration: f64 },
}

/// Linear ramps of intensity and detuning over the PG stage. The quadrupole
/// field stays on; it enters only through the unchanged geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgSchedule {
    /// s
    pub duration: f64,
    /// Intensity multiplier reached at the end of the ramp (starts at 1).
    pub end_intensity_scale: f64,
    /// rad/s
    pub detuning_start: f64,
    /// rad/s
    pub detuning_end: f64,
    /// Integration step, s.
    pub dt: f64,
}

impl PgSchedule {
    pub const DEFAULT_DURATION: f64 = 1.5e-3;
    /// Not given in the source measurements; chosen inside the usual
    /// PG range.
    pub const DEFAULT_END_INTENSITY_SCALE: f64 = 0.4;
    pub const DEFAULT_END_DETUNING_IN_LINEWIDTHS: f64 = -12.0;

    pub fn validate(&self) -> Result<(), String> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err("pg.duration must be >= 0".into());
        }
        if !(self.end_intensity_scale >= 0.0 && self.end_intensity_scale.is_finite()) {
            return Err("pg.end_intensity_scale must be >= 0".into());
        }
        if !(self.detuning_start.is_finite() && self.detuning_end.is_finite()) {
            return Err("pg detunings must be finite".into());
        }
        if !(self.dt > 0.0) {
            return Err("pg.dt must be > 0".into());
        }
        Ok(())
    }

    /// `(intensity_scale, detuning)` at time `t` into the stage.
    pub fn schedule_at(&self, t: f64) -> Result<(f64, f64), CoolingError> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(CoolingError::OutsideSchedule { t, duration: self.duration });
        }
        let f = if self.duration > 0.0 { t / self.duration } else { 0.0 };
        Ok((
            1.0 + (self.end_intensity_scale - 1.0) * f,
            self.detuning_start + (self.detuning_end - self.detuning_start) * f,
        ))
    }
}

/// Closure constants for sub-Doppler friction and heating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgModelParams {
    /// γ in units of ħk².
    pub friction_coefficient_scale: f64,
    /// C_pg.
    pub equilibrium_constant: f64,
    /// Speed below which the friction acts fully, m/s.
    pub capture_velocity: f64,
}

impl Default for PgModelParams {
    /// Calibrated by `examples/calibrate_pg.rs` to a 10 μK end temperature
    /// for the free-space scenario with the default schedule.
    fn default() -> Self {
        Self { friction_coefficient_scale: 1.0, equilibrium_constant: 4.85e-3, capture_velocity: 1.0 }
    }
}

impl PgModelParams {
    pub fn validate(&self) -> Result<(), String> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !(ok(self.friction_coefficient_scale) && ok(self.equilibrium_constant) && ok(self.capture_velocity)) {
            return Err("sub-Doppler model parameters must all be > 0".into());
        }
        Ok(())
    }

    /// Friction coefficient at full strength, kg/s.
    pub fn friction_coefficient(&self, species: &AtomSpecies) -> f64 {
        let k = species.wavenumber();
        self.friction_coefficient_scale * HBAR * k * k
    }

    /// 1 inside the capture window, Gaussian roll-off beyond it.
    pub fn taper(&self, speed: f64) -> f64 {
        if speed <= self.capture_velocity {
            1.0
        } else {
            let x = (speed - self.capture_velocity) / self.capture_velocity;
            (-x * x).exp()
        }
    }
}

/// `k_B T_eq = C_pg ħΓ s / |δ/Γ|`, in K; zero unless `δ < 0` and `s > 0`.
pub fn equilibrium_temperature(species: &AtomSpecies, params: &PgModelParams, local_s: f64, detuning: f64) -> f64 {
    if !(detuning < 0.0 && local_s > 0.0) {
        return 0.0;
    }
    let g = species.linewidth_gamma;
    params.equilibrium_constant * HBAR * g * local_s / (detuning.abs() / g) / BOLTZMANN
}

fn onset(local_s: f64) -> f64 {
    if local_s > 0.0 {
        local_s / (1.0 + local_s)
    } else {
        0.0
    }
}

/// Mean sub-Doppler force, N. Zero for non-negative detuning.
pub fn pg_force(species: &AtomSpecies, params: &PgModelParams, local_s: f64, detuning: f64, velocity: &Vec3) -> Vec3 {
    if detuning >= 0.0 {
        return Vec3::zeros();
    }
    let gamma = params.friction_coefficient(species) * onset(local_s) * params.taper(velocity.norm());
    -velocity * gamma
}

/// Exact Ornstein–Uhlenbeck update factors over one step: the velocity is
/// multiplied by `decay` and receives Gaussian noise of per-axis standard
/// deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubDopplerKick {
    pub decay: f64,
    pub sigma: f64,
}

impl SubDopplerKick {
    pub fn new(species: &AtomSpecies, params: &PgModelParams, local_s: f64, detuning: f64, speed: f64, dt: f64) -> Self {
        if detuning >= 0.0 || local_s <= 0.0 {
            return Self { decay: 1.0, sigma: 0.0 };
        }
        let rate = params.friction_coefficient(species) * onset(local_s) * params.taper(speed) / species.mass;
        let decay = (-rate * dt).exp();
        let var = BOLTZMANN * equilibrium_temperature(species, params, local_s, detuning) / species.mass
            * (1.0 - decay * decay);
        Self { decay, sigma: var.max(0.0).sqrt() }
    }
}

/// Ensemble temperatures at one instant of the PG stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgSample {
    /// s since the start of the stage
    pub t: f64,
    pub n_active: u64,
    /// K
    pub t_h: f64,
    /// K
    pub t_v: f64,
}

#[derive(Debug, Clone)]
pub struct PgStageResult {
    pub cloud: Cloud,
    pub summary: Vec<PgSample>,
}

/// Runs the PG stage and returns the surviving cloud.
pub fn run_pg_stage(scenario: &Scenario, cloud: &Cloud, schedule: &PgSchedule, model: &PgModelParams, seed: u64) -> Cloud {
    run_pg_stage_with_summary(scenario, cloud, schedule, model, seed, 16).cloud
}

/// Runs the PG stage, recording `samples` evenly spaced ensemble snapshots
/// (including both endpoints).
///
/// Doppler forces are off; each atom feels the sub-Doppler closure at the
/// ramped local saturation and detuning, gravity, membrane collisions and
/// background loss. Atom `i` of the input cloud uses substream `i` of `seed`.
pub fn run_pg_stage_with_summary(
    scenario: &Scenario,
    cloud: &Cloud,
    schedule: &PgSchedule,
    model: &PgModelParams,
    seed: u64,
    samples: usize,
) -> PgStageResult {
    let n_steps = (schedule.duration / schedule.dt).round() as u64;
    let dt = if n_steps > 0 { schedule.duration / n_steps as f64 } else { 0.0 };
    let samples = samples.max(2);
    let sample_steps: Vec<u64> = (0..samples).map(|j| (j as u64 * n_steps) / (samples as u64 - 1)).collect();
    let params = StepParams { dt, max_time: schedule.duration, escape_radius: scenario.escape_radius(), rng_seed: seed };

    let tracks: Vec<(CloudAtom, Vec<Option<Vec3>>)> = cloud
        .atoms
        .par_iter()
        .enumerate()
        .map(|(i, a)| propagate_pg(scenario, schedule, model, &params, a, &sample_steps, n_steps, i as u64))
        .collect();

    let mass = scenario.species.mass;
    let summary = sample_steps
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let snapshot: Vec<CloudAtom> = tracks
                .iter()
                .filter_map(|(a, vs)| vs[j].map(|v| CloudAtom { state: crate::AtomState::new(Vec3::zeros(), v), weight: a.weight }))
                .collect();
            let c = Cloud { atoms: snapshot, timestamp: k as f64 * dt };
            let (t_h, t_v) = c.temperatures_hv(mass);
            PgSample { t: k as f64 * dt, n_active: c.atoms.len() as u64, t_h, t_v }
        })
        .collect();

    let atoms = tracks.into_iter().map(|(a, _)| a).filter(|a| a.state.is_active()).collect();
    PgStageResult { cloud: Cloud { atoms, timestamp: cloud.timestamp + schedule.duration }, summary }
}

#[allow(clippy::too_many_arguments)]
fn propagate_pg(
    scenario: &Scenario,
    schedule: &PgSchedule,
    model: &PgModelParams,
    params: &StepParams,
    start: &CloudAtom,
    sample_steps: &[u64],
    n_steps: u64,
    index: u64,
) -> (CloudAtom, Vec<Option<Vec3>>) {
    let mut rng = substream(params.rng_seed, index);
    let mut atom = start.state;
    let mut velocities = vec![None; sample_steps.len()];
    let mut next = 0;
    let species = &scenario.species;
    let center = scenario.trap_center();
    let dt = params.dt;

    for k in 0..=n_steps {
        while next < sample_steps.len() && sample_steps[next] == k {
            if atom.is_active() {
                velocities[next] = Some(atom.velocity);
            }
            next += 1;
        }
        if k == n_steps || !atom.is_active() {
            break;
        }
        let (scale, detuning) = schedule.schedule_at(k as f64 * dt).unwrap_or((schedule.end_intensity_scale, schedule.detuning_end));
        let s = scenario.total_saturation(&atom.position) * scale;
        let kick = SubDopplerKick::new(species, model, s, detuning, atom.velocity.norm(), dt);
        let mut v = atom.velocity * kick.decay + scenario.gravity * dt;
        if kick.sigma > 0.0 {
            v += crate::dynamics::gaussian3(&mut rng) * kick.sigma;
        }
        let x_old = atom.position;
        atom.position += (atom.velocity + v) * (0.5 * dt);
        atom.velocity = v;

        if let Some(hit) = scenario.device.as_ref().and_then(|d| d.intersect_segment(&x_old, &atom.position)) {
            atom.position = hit.point;
            atom.status = AtomStatus::LostSurface(hit.surface_kind);
        } else if scenario.background_loss_rate > 0.0 && rng.gen::<f64>() < scenario.background_loss_rate * dt {
            atom.status = AtomStatus::LostBackground;
        } else if (atom.position - center).norm() > params.escape_radius {
            atom.status = AtomStatus::Escaped;
        }
    }
    (CloudAtom { state: atom, weight: start.weight }, velocities)
}
