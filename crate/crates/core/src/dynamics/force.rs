use rand::Rng;
use rand_distr::StandardNormal;

use super::{AtomState, AtomStatus, StepParams};
use crate::cooling::{PgModelParams, SubDopplerKick};
use crate::scene::{beam_intensity, SaturationModel, Scenario};
use crate::Vec3;

/// Precomputed force-model constants for one scenario.
#[derive(Debug, Clone)]
pub struct ForceField<'a> {
    pub scenario: &'a Scenario,
    wavenumber: f64,
    /// ħk/m
    recoil_velocity: f64,
    half_gamma: f64,
    two_over_gamma: f64,
    inv_isat: f64,
    shared: bool,
    /// Sub-Doppler closure active during the MOT stage.
    sub_doppler: Option<PgModelParams>,
    mot_detuning: f64,
    /// η μ' / 2k: maps Σ p_i (B·k̂_i) k̂_i to the sub-Doppler rest velocity.
    larmor_coefficient: f64,
}

impl<'a> ForceField<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        let sp = &scenario.species;
        let mot_detuning = scenario.mot_detuning();
        Self {
            scenario,
            wavenumber: sp.wavenumber(),
            recoil_velocity: sp.recoil_velocity(),
            half_gamma: 0.5 * sp.linewidth_gamma,
            two_over_gamma: 2.0 / sp.linewidth_gamma,
            inv_isat: 1.0 / sp.saturation_intensity,
            shared: scenario.force_model.saturation == SaturationModel::Shared,
            sub_doppler: (scenario.force_model.mot_sub_doppler && mot_detuning < 0.0)
                .then_some(scenario.force_model.sub_doppler),
            mot_detuning,
            larmor_coefficient: 0.5 * scenario.force_model.mot_sub_doppler_zeeman_ratio * sp.effective_zeeman_shift
                / sp.wavenumber(),
        }
    }

    /// Velocity towards which the MOT-stage sub-Doppler friction relaxes.
    ///
    /// For a counter-propagating pair along `â` with polarization sign `p`
    /// this is `η p μ' B_a / k`: the Doppler–Zeeman balance velocity scaled
    /// by the Larmor ratio η.
    pub fn sub_doppler_rest_velocity(&self, field: &Vec3) -> Vec3 {
        if self.larmor_coefficient == 0.0 {
            return Vec3::zeros();
        }
        let mut v = Vec3::zeros();
        for beam in &self.scenario.beams {
            v += beam.direction * (beam.polarization_sign * field.dot(&beam.direction));
        }
        v * self.larmor_coefficient
    }

    /// Writes per-beam saturation parameters into `sat` and returns their sum.
    pub fn saturations(&self, position: &Vec3, sat: &mut [f64]) -> f64 {
        let dev = self.scenario.device.as_ref();
        let mut total = 0.0;
        for (s, beam) in sat.iter_mut().zip(&self.scenario.beams) {
            *s = beam_intensity(beam, dev, position) * self.inv_isat;
            total += *s;
        }
        total
    }

    /// Per-beam scattering rates given saturations already in `buf`; the
    /// rates overwrite `buf`. Returns the total rate.
    fn rates_in_place(&self, velocity: &Vec3, field: &Vec3, total_sat: f64, buf: &mut [f64]) -> f64 {
        let sc = self.scenario;
        let mu = sc.species.effective_zeeman_shift;
        let mut sum = 0.0;
        for (r, beam) in buf.iter_mut().zip(&sc.beams) {
            let s = *r;
            if s <= 0.0 {
                *r = 0.0;
                continue;
            }
            let k_dot_v = self.wavenumber * beam.direction.dot(velocity);
            let zeeman = beam.polarization_sign * mu * field.dot(&beam.direction);
            let delta = beam.detuning - k_dot_v + zeeman;
            let x = delta * self.two_over_gamma;
            let sat_term = if self.shared { total_sat } else { s };
            *r = self.half_gamma * s / (1.0 + sat_term + x * x);
            sum += *r;
        }
        sum
    }

    /// Scattering rates R_i (1/s) at the atom's position and velocity.
    pub fn rates(&self, atom: &AtomState, buf: &mut [f64]) -> f64 {
        let total_sat = self.saturations(&atom.position, buf);
        let b = self.scenario.quad.field(&atom.position);
        self.rates_in_place(&atom.velocity, &b, total_sat, buf)
    }

    /// Deterministic acceleration: radiation pressure, mean sub-Doppler friction, gravity.
    pub fn acceleration(&self, atom: &AtomState, buf: &mut [f64]) -> Vec3 {
        let total_sat = self.saturations(&atom.position, buf);
        let b = self.scenario.quad.field(&atom.position);
        self.rates_in_place(&atom.velocity, &b, total_sat, buf);
        let mut a = self.scenario.gravity;
        for (r, beam) in buf.iter().zip(&self.scenario.beams) {
            a += beam.direction * (self.recoil_velocity * r);
        }
        if let Some(pg) = &self.sub_doppler {
            let sp = &self.scenario.species;
            let rel = atom.velocity - self.sub_doppler_rest_velocity(&b);
            a += crate::cooling::pg_force(sp, pg, total_sat, self.mot_detuning, &rel) / sp.mass;
        }
        a
    }
}

/// Semi-implicit stochastic integrator with geometric and background losses.
#[derive(Debug, Clone)]
pub struct Integrator<'a> {
    pub field: ForceField<'a>,
    pub dt: f64,
    pub escape_radius: f64,
    /// Recoil and sub-Doppler noise.
    pub noise: bool,
    pub background_loss: bool,
    buf: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(scenario: &'a Scenario, params: &StepParams) -> Self {
        Self {
            field: ForceField::new(scenario),
            dt: params.dt,
            escape_radius: params.escape_radius,
            noise: true,
            background_loss: true,
            buf: vec![0.0; scenario.beams.len()],
        }
    }

    /// Noise-free, loss-free propagation (capture-velocity searches).
    pub fn deterministic(mut self) -> Self {
        self.noise = false;
        self.background_loss = false;
        self
    }

    /// Advances an active atom by one step.
    ///
    /// Velocity: `v' = v₀ + (v − v₀)·e^{−γ_pg dt} + a dt + kicks`, where `v₀`
    /// is [`ForceField::sub_doppler_rest_velocity`], `a` holds radiation
    /// pressure and gravity, and the kicks are absorption shot noise along each
    /// beam, isotropic spontaneous emission, and the sub-Doppler diffusion
    /// matched to `γ_pg`. Position uses the mean of old and new velocity, which
    /// is exact for a uniform force.
    pub fn advance<R: Rng + ?Sized>(&mut self, atom: &mut AtomState, rng: &mut R) {
        if !atom.is_active() {
            return;
        }
        let ff = &self.field;
        let sc = ff.scenario;
        let dt = self.dt;
        let total_sat = ff.saturations(&atom.position, &mut self.buf);
        let b = sc.quad.field(&atom.position);
        let total_rate = ff.rates_in_place(&atom.velocity, &b, total_sat, &mut self.buf);

        let mut accel = sc.gravity;
        for (r, beam) in self.buf.iter().zip(&sc.beams) {
            accel += beam.direction * (ff.recoil_velocity * r);
        }

        let mut v_new = atom.velocity;
        let mut pg_sigma = 0.0;
        if let Some(pg) = &ff.sub_doppler {
            let v0 = ff.sub_doppler_rest_velocity(&b);
            let rel = atom.velocity - v0;
            let kick = SubDopplerKick::new(&sc.species, pg, total_sat, ff.mot_detuning, rel.norm(), dt);
            v_new = v0 + rel * kick.decay;
            pg_sigma = kick.sigma;
        }
        v_new += accel * dt;

        if self.noise {
            for (r, beam) in self.buf.iter().zip(&sc.beams) {
                if *r > 0.0 {
                    let xi: f64 = rng.sample(StandardNormal);
                    v_new += beam.direction * (ff.recoil_velocity * (r * dt).sqrt() * xi);
                }
            }
            let emit = ff.recoil_velocity * (total_rate * dt / 3.0).sqrt();
            let sigma = (emit * emit + pg_sigma * pg_sigma).sqrt();
            if sigma > 0.0 {
                let g = gaussian3(rng);
                v_new += g * sigma;
            }
        }

        let x_new = atom.position + (atom.velocity + v_new) * (0.5 * dt);
        let x_old = atom.position;
        atom.position = x_new;
        atom.velocity = v_new;

        if let Some(dev) = &sc.device {
            if let Some(hit) = dev.intersect_segment(&x_old, &x_new) {
                atom.position = hit.point;
                atom.status = AtomStatus::LostSurface(hit.surface_kind);
                return;
            }
        }
        if self.background_loss && sc.background_loss_rate > 0.0 && rng.gen::<f64>() < sc.background_loss_rate * dt {
            atom.status = AtomStatus::LostBackground;
            return;
        }
        if (atom.position - sc.quad.center).norm_squared() > self.escape_radius * self.escape_radius {
            atom.status = AtomStatus::Escaped;
        }
    }
}

pub(crate) fn gaussian3<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Scattering rate of every beam for an atom, 1/s.
pub fn scattering_rate_per_beam(scenario: &Scenario, atom: &AtomState) -> Vec<f64> {
    let ff = ForceField::new(scenario);
    let mut buf = vec![0.0; scenario.beams.len()];
    ff.rates(atom, &mut buf);
    buf
}

/// Deterministic drift force on an atom, N.
pub fn net_force(scenario: &Scenario, atom: &AtomState) -> Vec3 {
    let ff = ForceField::new(scenario);
    let mut buf = vec![0.0; scenario.beams.len()];
    ff.acceleration(atom, &mut buf) * scenario.species.mass
}

/// One stochastic step of `atom`.
pub fn step<R: Rng + ?Sized>(scenario: &Scenario, atom: &AtomState, params: &StepParams, rng: &mut R) -> AtomState {
    let mut next = *atom;
    Integrator::new(scenario, params).advance(&mut next, rng);
    next
}
