use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::field::QuadrupoleField;
use super::membrane::MembraneDevice;
use crate::Vec3;

/// Collimated Gaussian cooling beam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    /// Propagation direction (unit vector).
    pub direction: Vec3,
    /// W
    pub power: f64,
    /// 1/e² intensity radius, m; constant along the beam.
    pub waist_radius: f64,
    /// Laser minus atomic angular frequency, rad/s (negative is red).
    pub detuning: f64,
    /// Handedness relative to `direction`: +1 for σ+, −1 for σ−.
    pub polarization_sign: f64,
    /// A point on the beam axis upstream of the trap, m.
    pub origin_point: Vec3,
}

impl Beam {
    /// On-axis intensity 2P/(πw²).
    pub fn peak_intensity(&self) -> f64 {
        2.0 * self.power / (PI * self.waist_radius * self.waist_radius)
    }

    /// Squared distance from `point` to the beam axis.
    pub fn transverse_distance_sq(&self, point: &Vec3) -> f64 {
        let r = point - self.origin_point;
        let along = r.dot(&self.direction);
        (r.norm_squared() - along * along).max(0.0)
    }

    /// Gaussian intensity ignoring any membrane.
    pub fn free_intensity(&self, point: &Vec3) -> f64 {
        let w2 = self.waist_radius * self.waist_radius;
        self.peak_intensity() * (-2.0 * self.transverse_distance_sq(point) / w2).exp()
    }

    /// Upstream point on the ray of light that reaches `point`: the same
    /// transverse offset, at the axial position of the beam origin.
    pub fn ray_source(&self, point: &Vec3) -> Vec3 {
        let along = (point - self.origin_point).dot(&self.direction);
        point - self.direction * along
    }

    pub(crate) fn validate(&self, index: usize) -> Result<(), String> {
        if (self.direction.norm() - 1.0).abs() > 1e-12 {
            return Err(format!("beams[{index}].direction must be a unit vector"));
        }
        if !(self.waist_radius > 0.0 && self.waist_radius.is_finite()) {
            return Err(format!("beams[{index}].waist_radius must be > 0"));
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(format!("beams[{index}].power must be >= 0"));
        }
        if !self.detuning.is_finite() {
            return Err(format!("beams[{index}].detuning must be finite"));
        }
        if self.polarization_sign != 1.0 && self.polarization_sign != -1.0 {
            return Err(format!("beams[{index}].polarization_sign must be +1 or -1"));
        }
        Ok(())
    }
}

/// Intensity of `beam` at `point`, attenuated by the membrane transmittance
/// when the light has passed through solid membrane on its way there.
pub fn beam_intensity(beam: &Beam, device: Option<&MembraneDevice>, point: &Vec3) -> f64 {
    let free = beam.free_intensity(point);
    match device {
        Some(dev) if dev.optical_crossing(&beam.ray_source(point), point) => free * dev.transmittance,
        _ => free,
    }
}

/// Six beams along ±x, ±y, ±z meeting at `center`.
///
/// Polarizations are chosen so that each beam pushes atoms back towards the
/// field zero: a beam is σ− when `B·k̂` grows along its direction of travel.
pub fn six_beam_set(
    power: f64,
    waist_radius: f64,
    detuning: f64,
    quad: &QuadrupoleField,
    center: Vec3,
    origin_distance: f64,
) -> Vec<Beam> {
    let axes = [Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()];
    axes.iter()
        .map(|dir| Beam {
            direction: *dir,
            power,
            waist_radius,
            detuning,
            polarization_sign: restoring_polarization(quad, dir),
            origin_point: center - dir * origin_distance,
        })
        .collect()
}

/// Polarization sign that makes a red-detuned beam along `dir` restoring.
pub fn restoring_polarization(quad: &QuadrupoleField, dir: &Vec3) -> f64 {
    if quad.gradient_along(dir) > 0.0 {
        -1.0
    } else {
        1.0
    }
}
