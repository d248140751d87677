//! Physical constants (SI) and lab-unit conversion factors.

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.806_65;

/// One gauss in tesla.
pub const GAUSS: f64 = 1e-4;
/// Gradient of 1 G/cm in T/m.
pub const GAUSS_PER_CM: f64 = 1e-2;
/// 1 mW/cm² in W/m².
pub const MW_PER_CM2: f64 = 10.0;

/// Converts a frequency in MHz (cyclic) to an angular frequency in rad/s.
pub fn mhz_to_angular(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

/// Converts an angular frequency in rad/s to MHz (cyclic).
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}
