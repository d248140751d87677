use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{AMU, BOLTZMANN, GAUSS, HBAR, MW_PER_CM2};
use crate::constants::mhz_to_angular;

/// Two-level description of the laser-cooling transition of one atomic species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomSpecies {
    /// kg
    pub mass: f64,
    /// m
    pub wavelength: f64,
    /// Natural linewidth Γ, rad/s.
    pub linewidth_gamma: f64,
    /// W/m²
    pub saturation_intensity: f64,
    /// Effective Zeeman shift of the cycling transition, rad/s per tesla.
    pub effective_zeeman_shift: f64,
}

impl AtomSpecies {
    /// ¹³³Cs on the D2 line (852 nm) with a 1.4 MHz/G effective moment.
    pub fn cesium_d2() -> Self {
        Self {
            mass: 132.905_451_933 * AMU,
            wavelength: 852.347_275_82e-9,
            linewidth_gamma: mhz_to_angular(5.2),
            saturation_intensity: 1.1 * MW_PER_CM2,
            effective_zeeman_shift: mhz_to_angular(1.4) / GAUSS,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Photon momentum ħk.
    pub fn recoil_momentum(&self) -> f64 {
        HBAR * self.wavenumber()
    }

    /// ħk/m, m/s.
    pub fn recoil_velocity(&self) -> f64 {
        self.recoil_momentum() / self.mass
    }

    /// Doppler limit ħΓ/(2k_B), K.
    pub fn doppler_temperature(&self) -> f64 {
        HBAR * self.linewidth_gamma / (2.0 * BOLTZMANN)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let fields = [
            ("mass", self.mass),
            ("wavelength", self.wavelength),
            ("linewidth_gamma", self.linewidth_gamma),
            ("saturation_intensity", self.saturation_intensity),
            ("effective_zeeman_shift", self.effective_zeeman_shift),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(format!("species.{name} must be finite and > 0 (got {value})"));
            }
        }
        Ok(())
    }
}
