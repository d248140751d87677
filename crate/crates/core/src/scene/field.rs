use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Linear quadrupole field of an anti-Helmholtz coil pair.
///
/// In centre-relative coordinates with `z` along `axis` and `ρ` the transverse
/// displacement, `B = gradient · (z·axis − ρ/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupoleField {
    pub axis: Vec3,
    /// dB/dz along the axis, T/m.
    pub gradient: f64,
    pub center: Vec3,
}

impl QuadrupoleField {
    pub fn new(axis: Vec3, gradient: f64, center: Vec3) -> Self {
        Self { axis: axis.normalize(), gradient, center }
    }

    pub fn field(&self, point: &Vec3) -> Vec3 {
        let r = point - self.center;
        let z = r.dot(&self.axis);
        let rho = r - self.axis * z;
        (self.axis * z - rho * 0.5) * self.gradient
    }

    /// Rate of change of `B·dir` when moving along `dir`: `g(3cos²θ − 1)/2`.
    pub fn gradient_along(&self, dir: &Vec3) -> f64 {
        let c = dir.dot(&self.axis);
        self.gradient * (1.5 * c * c - 0.5)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if !self.gradient.is_finite() {
            return Err("quad.gradient must be finite".into());
        }
        if (self.axis.norm() - 1.0).abs() > 1e-12 {
            return Err("quad.axis must be a unit vector".into());
        }
        Ok(())
    }
}

/// Free function form used by the force model.
pub fn magnetic_field(quad: &QuadrupoleField, point: &Vec3) -> Vec3 {
    quad.field(point)
}
