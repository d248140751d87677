//! Virtual diagnostics: region counts, cloud sizes and time of flight.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::BOLTZMANN;
use crate::dynamics::AtomState;
use crate::rng::substream;
use crate::scene::{MembraneDevice, PlaneZone, Scenario};
use crate::Vec3;

/// Radius of the default counting sphere around the trap centre, m.
pub const TRAP_REGION_RADIUS: f64 = 1e-3;

/// Minimum active atoms for a width estimate.
pub const MIN_ATOMS_FOR_WIDTH: usize = 30;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("need at least {needed} active atoms, found {found}")]
    TooFewAtoms { found: usize, needed: usize },
    #[error("drop times must be nonempty, nonnegative and strictly increasing")]
    BadDropTimes,
    #[error("profile fit failed: {0}")]
    Fit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudAtom {
    pub state: AtomState,
    pub weight: f64,
}

/// Snapshot of an atom ensemble.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Cloud {
    pub atoms: Vec<CloudAtom>,
    /// s
    pub timestamp: f64,
}

impl Cloud {
    /// Unit-weight cloud at time zero.
    pub fn from_states(states: impl IntoIterator<Item = AtomState>) -> Self {
        Self { atoms: states.into_iter().map(|state| CloudAtom { state, weight: 1.0 }).collect(), timestamp: 0.0 }
    }

    pub fn active(&self) -> impl Iterator<Item = &CloudAtom> {
        self.atoms.iter().filter(|a| a.state.is_active())
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }

    pub fn total_weight(&self) -> f64 {
        self.active().map(|a| a.weight).sum()
    }

    /// Keeps only active atoms inside `region`.
    pub fn restricted_to(&self, region: &Region) -> Cloud {
        Cloud {
            atoms: self.active().filter(|a| region.contains(&a.state.position)).copied().collect(),
            timestamp: self.timestamp,
        }
    }

    fn weighted_variance(&self, f: impl Fn(&AtomState) -> f64) -> f64 {
        // shifted by the first value so that identical samples give exactly 0
        let Some(first) = self.active().next() else { return 0.0 };
        let shift = f(&first.state);
        let (mut w, mut m1) = (0.0, 0.0);
        for a in self.active() {
            w += a.weight;
            m1 += a.weight * (f(&a.state) - shift);
        }
        if w <= 0.0 {
            return 0.0;
        }
        let mean = m1 / w;
        self.active().map(|a| a.weight * (f(&a.state) - shift - mean).powi(2)).sum::<f64>() / w
    }

    /// Weighted standard deviation of positions projected on `axis`, m.
    pub fn sigma_along(&self, axis: &Vec3) -> f64 {
        let u = axis.normalize();
        self.weighted_variance(|s| s.position.dot(&u)).sqrt()
    }

    pub fn mean_position(&self) -> Vec3 {
        let w = self.total_weight();
        if w <= 0.0 {
            return Vec3::zeros();
        }
        self.active().map(|a| a.state.position * a.weight).sum::<Vec3>() / w
    }

    /// Kinetic temperature along `axis` from the velocity variance, K.
    pub fn temperature_along(&self, axis: &Vec3, mass: f64) -> f64 {
        let u = axis.normalize();
        mass * self.weighted_variance(|s| s.velocity.dot(&u)) / BOLTZMANN
    }

    /// `(T_H, T_V)`: mean over the horizontal x, y axes and along vertical z, K.
    pub fn temperatures_hv(&self, mass: f64) -> (f64, f64) {
        let th = 0.5 * (self.temperature_along(&Vec3::x(), mass) + self.temperature_along(&Vec3::y(), mass));
        (th, self.temperature_along(&Vec3::z(), mass))
    }
}

/// Counting volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Sphere { center: Vec3, radius: f64 },
    /// Cylinder coaxial with the hole, symmetric about the membrane plane.
    HoleCylinder { center: Vec3, axis: Vec3, radius: f64, height: f64 },
}

impl Region {
    pub fn sphere(center: Vec3, radius: f64) -> Self {
        Region::Sphere { center, radius }
    }

    /// Sphere of [`TRAP_REGION_RADIUS`] at the trap centre.
    pub fn trap_sphere(scenario: &Scenario) -> Self {
        Region::sphere(scenario.trap_center(), TRAP_REGION_RADIUS)
    }

    pub fn hole_cylinder(device: &MembraneDevice, height: f64) -> Self {
        Region::HoleCylinder {
            center: device.plane_point,
            axis: device.plane_normal,
            radius: device.hole_radius,
            height,
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        match self {
            Region::Sphere { center, radius } => (p - center).norm_squared() <= radius * radius,
            Region::HoleCylinder { center, axis, radius, height } => {
                let d = p - center;
                let h = d.dot(axis);
                let rho2 = (d - axis * h).norm_squared();
                h.abs() <= 0.5 * height && rho2 <= radius * radius
            }
        }
    }
}

/// Sum of weights of active atoms inside `region`.
pub fn count_in_region(cloud: &Cloud, region: &Region) -> f64 {
    cloud.active().filter(|a| region.contains(&a.state.position)).map(|a| a.weight).sum()
}

/// Gaussian 1/e² diameter `4σ` along `axis`, m.
pub fn cloud_diameter_1e2(cloud: &Cloud, axis: &Vec3) -> Result<f64, MeasureError> {
    let n = cloud.active_count();
    if n < MIN_ATOMS_FOR_WIDTH {
        return Err(MeasureError::TooFewAtoms { found: n, needed: MIN_ATOMS_FOR_WIDTH });
    }
    Ok(4.0 * cloud.sigma_along(axis))
}

/// 1/e² diameter `4σ` from a Gaussian fitted to the position histogram along
/// `axis`; insensitive to a sparse halo of atoms far from the core.
pub fn cloud_diameter_fitted(cloud: &Cloud, axis: &Vec3) -> Result<f64, MeasureError> {
    let n = cloud.active_count();
    if n < MIN_ATOMS_FOR_WIDTH {
        return Err(MeasureError::TooFewAtoms { found: n, needed: MIN_ATOMS_FOR_WIDTH });
    }
    let u = axis.normalize();
    let x: Vec<f64> = cloud.active().map(|a| a.state.position.dot(&u)).collect();
    let w: Vec<f64> = cloud.active().map(|a| a.weight).collect();
    let bins = ((n as f64).sqrt().round() as usize).clamp(8, 40);
    let fit = crate::fit::fit_gaussian_histogram(&x, &w, bins).map_err(|e| MeasureError::Fit(e.to_string()))?;
    Ok(4.0 * fit.sigma)
}

/// Cloud widths and survivors after ballistic expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TofSeries {
    /// s
    pub drop_times: Vec<f64>,
    /// Horizontal 1/e² radius `2σ_H`, with `σ_H² = (σ_x² + σ_y²)/2`, m.
    /// NaN when fewer than two atoms survive.
    pub widths_h: Vec<f64>,
    /// Vertical 1/e² radius `2σ_z`, m.
    pub widths_v: Vec<f64>,
    pub survivors: Vec<u64>,
    pub survivor_weight: Vec<f64>,
}

/// Time at which a ballistic atom first meets a solid part of the device
/// within `(0, t_max]`.
fn ballistic_hit_time(device: &MembraneDevice, s: &AtomState, g: &Vec3, t_max: f64) -> Option<f64> {
    let n = device.plane_normal;
    let d0 = device.signed_distance(&s.position);
    let b = n.dot(&s.velocity);
    let a = 0.5 * n.dot(g);
    let mut roots = solve_quadratic(a, b, d0);
    roots.retain(|t| *t > 0.0 && *t <= t_max);
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&t| {
        let p = s.position + s.velocity * t + g * (0.5 * t * t);
        matches!(device.zone_at(&p), PlaneZone::Membrane | PlaneZone::Bridge)
    })
}

/// Real roots of `a t² + b t + c = 0`.
fn solve_quadratic(a: f64, b: f64, c: f64) -> Vec<f64> {
    let scale = a.abs().max(b.abs()).max(c.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if a.abs() <= 1e-300 {
        return if b != 0.0 { vec![-c / b] } else { Vec::new() };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

/// Releases the cloud with all light off and follows it ballistically.
///
/// Atoms are removed at the first crossing of membrane or bridge, or at an
/// exponentially distributed background-collision time drawn from substream
/// `i` of `seed` for atom `i`.
pub fn run_tof(scenario: &Scenario, cloud: &Cloud, drop_times: &[f64], seed: u64) -> Result<TofSeries, MeasureError> {
    if drop_times.is_empty() || drop_times[0] < 0.0 || drop_times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MeasureError::BadDropTimes);
    }
    let t_max = *drop_times.last().unwrap();
    let g = scenario.gravity;
    let rate = scenario.background_loss_rate;

    let loss_times: Vec<f64> = cloud
        .atoms
        .par_iter()
        .enumerate()
        .map(|(i, a)| {
            if !a.state.is_active() {
                return f64::NEG_INFINITY;
            }
            let surface = scenario
                .device
                .as_ref()
                .and_then(|d| ballistic_hit_time(d, &a.state, &g, t_max))
                .unwrap_or(f64::INFINITY);
            let background = if rate > 0.0 {
                let u: f64 = substream(seed, i as u64).gen();
                -(1.0 - u).ln() / rate
            } else {
                f64::INFINITY
            };
            surface.min(background)
        })
        .collect();

    let mut out = TofSeries {
        drop_times: drop_times.to_vec(),
        widths_h: Vec::new(),
        widths_v: Vec::new(),
        survivors: Vec::new(),
        survivor_weight: Vec::new(),
    };
    for &t in drop_times {
        let atoms: Vec<CloudAtom> = cloud
            .atoms
            .iter()
            .zip(&loss_times)
            .filter(|(_, &tl)| tl > t)
            .map(|(a, _)| {
                let s = &a.state;
                let p = s.position + s.velocity * t + g * (0.5 * t * t);
                CloudAtom { state: AtomState::new(p, s.velocity + g * t), weight: a.weight }
            })
            .collect();
        let snap = Cloud { atoms, timestamp: cloud.timestamp + t };
        let n = snap.atoms.len();
        let (wh, wv) = if n >= 2 {
            let sh = (0.5 * (snap.sigma_along(&Vec3::x()).powi(2) + snap.sigma_along(&Vec3::y()).powi(2))).sqrt();
            (2.0 * sh, 2.0 * snap.sigma_along(&Vec3::z()))
        } else {
            (f64::NAN, f64::NAN)
        };
        out.widths_h.push(wh);
        out.widths_v.push(wv);
        out.survivors.push(n as u64);
        out.survivor_weight.push(snap.total_weight());
    }
    Ok(out)
}
