use rand::Rng;

use super::force::gaussian3;
use super::{AtomState, DynamicsError};
use crate::constants::BOLTZMANN;
use crate::scene::{PlaneZone, Scenario};
use crate::Vec3;

/// Injection points closer than this to solid membrane carry the
/// near-surface density factor, m.
pub const NEAR_SURFACE_DISTANCE: f64 = 300e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct InjectedAtom {
    pub state: AtomState,
    /// Statistical weight: the flux fraction covered by the sampled speed
    /// range, times the near-surface factor where it applies.
    pub weight: f64,
}

/// Cumulative flux fraction with speed below `v`: for the flux-weighted
/// Maxwell–Boltzmann distribution f(v) ∝ v³ exp(−v²/2σ²), with
/// u = v²/2σ², F(u) = 1 − (1 + u)e^{−u}.
pub fn flux_fraction_below(v: f64, sigma: f64) -> f64 {
    let u = 0.5 * (v / sigma).powi(2);
    flux_cdf(u)
}

fn flux_cdf(u: f64) -> f64 {
    if u.is_infinite() {
        return 1.0;
    }
    // 1 − e^{−u} − u e^{−u}, written to keep precision for small u
    (-(-u).exp_m1() - u * (-u).exp()).max(0.0)
}

/// Solves F(u) = target for u in [0, u_max] by bisection.
fn invert_flux_cdf(target: f64, u_max: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, u_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if flux_cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn sample_speed<R: Rng + ?Sized>(sigma: f64, v_trunc: Option<f64>, rng: &mut R) -> (f64, f64) {
    match v_trunc {
        None => {
            // u follows Gamma(2, 1): the sum of two unit exponentials
            let u = -(rng.gen::<f64>().max(f64::MIN_POSITIVE).ln() + rng.gen::<f64>().max(f64::MIN_POSITIVE).ln());
            (sigma * (2.0 * u).sqrt(), 1.0)
        }
        Some(vt) => {
            let u_max = 0.5 * (vt / sigma).powi(2);
            let f_max = flux_cdf(u_max);
            let u = invert_flux_cdf(rng.gen::<f64>() * f_max, u_max);
            ((sigma * (2.0 * u).sqrt()).min(vt), f_max)
        }
    }
}

/// Draws one candidate atom entering through the injection sphere.
///
/// Position is uniform on the sphere; direction is cosine-distributed about
/// the inward normal (the angular part of an isotropic flux); speed follows
/// the flux-weighted Maxwell–Boltzmann law restricted to
/// `[0, vapor.truncation_speed]`.
pub fn sample_injected_atom<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<InjectedAtom, DynamicsError> {
    let vapor = &scenario.vapor;
    if let Some(vt) = vapor.truncation_speed {
        if !(vt > 0.0) {
            return Err(DynamicsError::Config(format!("truncation speed must be > 0 (got {vt})")));
        }
    }
    let center = scenario.trap_center();
    let (position, normal) = loop {
        let n = loop {
            let g = gaussian3(rng);
            let len = g.norm();
            if len > 1e-12 {
                break g / len;
            }
        };
        let p = center + n * vapor.injection_radius;
        let on_solid = scenario
            .device
            .as_ref()
            .is_some_and(|d| d.signed_distance(&p) == 0.0 && d.zone_at(&p) == PlaneZone::Membrane);
        if !on_solid {
            break (p, n);
        }
    };

    let inward = -normal;
    let (e1, e2) = orthonormal_pair(&inward);
    let cos_t = rng.gen::<f64>().sqrt();
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = std::f64::consts::TAU * rng.gen::<f64>();
    let dir = inward * cos_t + e1 * (sin_t * phi.cos()) + e2 * (sin_t * phi.sin());

    let sigma = (BOLTZMANN * vapor.temperature / scenario.species.mass).sqrt();
    let (speed, mut weight) = sample_speed(sigma, vapor.truncation_speed, rng);
    if let Some(dev) = &scenario.device {
        if dev.distance_to_solid(&position) < NEAR_SURFACE_DISTANCE {
            weight *= vapor.near_surface_density_factor;
        }
    }
    Ok(InjectedAtom { state: AtomState::new(position, dir * speed), weight })
}

pub(crate) fn orthonormal_pair(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}
