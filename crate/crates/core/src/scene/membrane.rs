use serde::{Deserialize, Serialize};

use crate::dynamics::SurfaceKind;
use crate::Vec3;

/// Suspended square membrane with a circular hole, optionally crossed by a
/// narrow bridge through the hole centre.
///
/// The membrane is infinitely thin. Its square edges are aligned with the
/// in-plane basis `(edge_axis, normal × edge_axis)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembraneDevice {
    pub plane_normal: Vec3,
    /// Hole centre, m.
    pub plane_point: Vec3,
    /// Half side of the square membrane, m.
    pub membrane_half_extent: f64,
    pub hole_radius: f64,
    pub bridge_present: bool,
    pub bridge_width: f64,
    pub bridge_axis: Vec3,
    pub transmittance: f64,
    /// In-plane unit vector along one pair of membrane edges.
    pub edge_axis: Vec3,
}

/// Where a point of the membrane plane falls on the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneZone {
    /// Inside the hole and off the bridge.
    Open,
    Membrane,
    Bridge,
    /// Beyond the membrane edge.
    Outside,
}

/// First solid crossing of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    /// Fraction of the segment at the crossing, in [0, 1].
    pub fraction: f64,
    pub surface_kind: SurfaceKind,
}

impl MembraneDevice {
    /// Device whose normal is tilted by `tilt` (rad) from `vertical` towards the
    /// horizontal azimuth `azimuth` (rad, measured from +x towards +y).
    #[allow(clippy::too_many_arguments)]
    pub fn tilted(
        tilt: f64,
        azimuth: f64,
        plane_point: Vec3,
        membrane_half_extent: f64,
        hole_radius: f64,
        bridge: Option<f64>,
        transmittance: f64,
    ) -> Self {
        let normal = Vec3::new(tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos());
        let edge_axis = horizontal_in_plane(&normal);
        Self {
            plane_normal: normal,
            plane_point,
            membrane_half_extent,
            hole_radius,
            bridge_present: bridge.is_some(),
            bridge_width: bridge.unwrap_or(3e-6),
            bridge_axis: edge_axis,
            transmittance,
            edge_axis,
        }
    }

    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.plane_normal.dot(&(p - self.plane_point))
    }

    /// In-plane coordinates of the projection of `p`, relative to the hole centre.
    pub fn in_plane(&self, p: &Vec3) -> (f64, f64) {
        let r = p - self.plane_point;
        let e2 = self.plane_normal.cross(&self.edge_axis);
        (r.dot(&self.edge_axis), r.dot(&e2))
    }

    pub fn zone_at(&self, p: &Vec3) -> PlaneZone {
        let r = p - self.plane_point;
        let r = r - self.plane_normal * r.dot(&self.plane_normal);
        let (u1, u2) = self.in_plane(p);
        if u1.abs() > self.membrane_half_extent || u2.abs() > self.membrane_half_extent {
            return PlaneZone::Outside;
        }
        if r.norm_squared() > self.hole_radius * self.hole_radius {
            return PlaneZone::Membrane;
        }
        if self.bridge_present {
            let across = self.plane_normal.cross(&self.bridge_axis);
            if r.dot(&across).abs() <= 0.5 * self.bridge_width {
                return PlaneZone::Bridge;
            }
        }
        PlaneZone::Open
    }

    /// First crossing of the membrane plane by the segment `p0 → p1` that lands
    /// on solid material (membrane or bridge).
    ///
    /// The plane splits space into `d < 0` and `d ≥ 0`; a crossing is a change
    /// of side, so a segment that starts or ends exactly in the plane is
    /// counted once and the result is symmetric under reversal.
    pub fn intersect_segment(&self, p0: &Vec3, p1: &Vec3) -> Option<Hit> {
        let d0 = self.signed_distance(p0);
        let d1 = self.signed_distance(p1);
        if (d0 < 0.0) == (d1 < 0.0) {
            return None;
        }
        let fraction = d0 / (d0 - d1);
        let point = p0 + (p1 - p0) * fraction;
        let surface_kind = match self.zone_at(&point) {
            PlaneZone::Membrane => SurfaceKind::Membrane,
            PlaneZone::Bridge => SurfaceKind::Bridge,
            PlaneZone::Open | PlaneZone::Outside => return None,
        };
        Some(Hit { point, fraction, surface_kind })
    }

    /// Whether light travelling from `from` to `to` passes through solid
    /// membrane. The bridge is optically negligible and never counts.
    pub fn optical_crossing(&self, from: &Vec3, to: &Vec3) -> bool {
        let d0 = self.signed_distance(from);
        let d1 = self.signed_distance(to);
        if (d0 < 0.0) == (d1 < 0.0) {
            return false;
        }
        let point = from + (to - from) * (d0 / (d0 - d1));
        self.zone_at(&point) == PlaneZone::Membrane
    }

    /// Distance from `p` to the solid membrane (the bridge is ignored).
    pub fn distance_to_solid(&self, p: &Vec3) -> f64 {
        let h = self.signed_distance(p);
        let (u1, u2) = self.in_plane(p);
        let a = self.membrane_half_extent;
        let dx = (u1.abs() - a).max(0.0);
        let dy = (u2.abs() - a).max(0.0);
        let lateral = if dx > 0.0 || dy > 0.0 {
            (dx * dx + dy * dy).sqrt()
        } else {
            (self.hole_radius - (u1 * u1 + u2 * u2).sqrt()).max(0.0)
        };
        (h * h + lateral * lateral).sqrt()
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if (self.plane_normal.norm() - 1.0).abs() > 1e-12 {
            return Err("device.plane_normal must be a unit vector".into());
        }
        if !(self.hole_radius > 0.0 && self.hole_radius < self.membrane_half_extent) {
            return Err(format!(
                "device: require 0 < hole_radius < membrane_half_extent (hole_radius = {} m, membrane_half_extent = {} m)",
                self.hole_radius, self.membrane_half_extent
            ));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(format!("device.transmittance must be in (0, 1] (got {})", self.transmittance));
        }
        if self.bridge_present {
            if !(self.bridge_width > 0.0) {
                return Err("device.bridge_width must be > 0".into());
            }
            if self.bridge_axis.dot(&self.plane_normal).abs() > 1e-9 {
                return Err("device.bridge_axis must be perpendicular to plane_normal".into());
            }
        }
        Ok(())
    }
}

/// Horizontal unit vector lying in the plane with the given normal (z is vertical).
pub(crate) fn horizontal_in_plane(normal: &Vec3) -> Vec3 {
    let h = Vec3::z().cross(normal);
    if h.norm() < 1e-12 {
        Vec3::x()
    } else {
        h.normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat_device(bridge: bool) -> MembraneDevice {
        MembraneDevice::tilted(0.0, 0.0, Vec3::zeros(), 2.5e-3, 0.2e-3, bridge.then_some(3e-6), 0.95)
    }

    #[test]
    fn open_hole_passes() {
        let dev = flat_device(false);
        let hit = dev.intersect_segment(&Vec3::new(0.0, 0.0, -1e-3), &Vec3::new(0.0, 0.0, 1e-3));
        assert!(hit.is_none());
    }

    #[test]
    fn solid_region_hits_membrane() {
        let dev = flat_device(false);
        let hit = dev
            .intersect_segment(&Vec3::new(1e-3, 0.0, -1e-3), &Vec3::new(1e-3, 0.0, 1e-3))
            .expect("hit");
        assert_eq!(hit.surface_kind, SurfaceKind::Membrane);
        assert!((hit.point - Vec3::new(1e-3, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn beyond_edge_passes() {
        let dev = flat_device(false);
        assert!(dev.intersect_segment(&Vec3::new(3e-3, 0.0, -1e-3), &Vec3::new(3e-3, 0.0, 1e-3)).is_none());
    }

    /// Brute-force oracle: march along the segment and classify the first sign change.
    fn brute_force(dev: &MembraneDevice, p0: &Vec3, p1: &Vec3, n: usize) -> Option<(Vec3, PlaneZone)> {
        let mut prev = *p0;
        for i in 1..=n {
            let p = p0 + (p1 - p0) * (i as f64 / n as f64);
            let (a, b) = (dev.signed_distance(&prev), dev.signed_distance(&p));
            if (a < 0.0) != (b < 0.0) {
                // bisect the bracket
                let (mut lo, mut hi) = (prev, p);
                for _ in 0..200 {
                    let mid = (lo + hi) * 0.5;
                    if (dev.signed_distance(&mid) < 0.0) == (a < 0.0) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let x = (lo + hi) * 0.5;
                return Some((x, dev.zone_at(&x)));
            }
            prev = p;
        }
        None
    }

    #[test]
    fn bridge_hit_at_hole_center() {
        let dev = MembraneDevice::tilted(40f64.to_radians(), 45f64.to_radians(), Vec3::zeros(), 2.5e-3, 0.2e-3, Some(3e-6), 0.95);
        let p0 = -dev.plane_normal * 1e-3 + Vec3::new(0.0, 0.0, 0.0);
        let p1 = dev.plane_normal * 2e-3;
        let hit = dev.intersect_segment(&p0, &p1).expect("bridge hit");
        assert_eq!(hit.surface_kind, SurfaceKind::Bridge);
        assert!(hit.point.norm() < 1e-15);

        let (x, zone) = brute_force(&dev, &p0, &p1, 1000).unwrap();
        assert_eq!(zone, PlaneZone::Bridge);
        assert!((x - hit.point).norm() < 1e-12);

        let unbridged = MembraneDevice { bridge_present: false, ..dev };
        assert!(unbridged.intersect_segment(&p0, &p1).is_none());
    }

    #[test]
    fn distance_to_solid_cases() {
        let dev = flat_device(false);
        assert!((dev.distance_to_solid(&Vec3::new(1e-3, 0.0, 3e-4)) - 3e-4).abs() < 1e-15);
        assert!((dev.distance_to_solid(&Vec3::new(0.0, 0.0, 0.0)) - 2e-4).abs() < 1e-15);
        assert!((dev.distance_to_solid(&Vec3::new(3e-3, 0.0, 0.0)) - 5e-4).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_oversized_hole() {
        let mut dev = flat_device(false);
        dev.hole_radius = 3e-3;
        assert!(dev.validate().unwrap_err().contains("hole_radius"));
    }

    proptest! {
        #[test]
        fn reversal_reports_same_point(
            a in prop::array::uniform3(-3e-3f64..3e-3),
            b in prop::array::uniform3(-3e-3f64..3e-3),
            bridge in any::<bool>(),
        ) {
            let dev = MembraneDevice::tilted(0.7, 0.8, Vec3::zeros(), 2.5e-3, 0.2e-3, bridge.then_some(3e-4), 0.95);
            let (p0, p1) = (Vec3::from(a), Vec3::from(b));
            prop_assume!((p1 - p0).norm() > 1e-9);
            let fwd = dev.intersect_segment(&p0, &p1);
            let bwd = dev.intersect_segment(&p1, &p0);
            prop_assert_eq!(fwd.is_some(), bwd.is_some());
            if let (Some(f), Some(r)) = (fwd, bwd) {
                prop_assert!((f.point - r.point).norm() < 1e-12);
                prop_assert_eq!(f.surface_kind, r.surface_kind);
            }
        }

        #[test]
        fn matches_brute_force_sampling(
            a in prop::array::uniform3(-3e-3f64..3e-3),
            b in prop::array::uniform3(-3e-3f64..3e-3),
        ) {
            let dev = MembraneDevice::tilted(0.7, 0.8, Vec3::zeros(), 2.5e-3, 0.5e-3, Some(2e-4), 0.95);
            let (p0, p1) = (Vec3::from(a), Vec3::from(b));
            let hit = dev.intersect_segment(&p0, &p1);
            let brute = brute_force(&dev, &p0, &p1, 64);
            match (hit, brute) {
                (Some(h), Some((x, zone))) => {
                    prop_assert!((h.point - x).norm() < 1e-12);
                    let expect = if h.surface_kind == SurfaceKind::Bridge { PlaneZone::Bridge } else { PlaneZone::Membrane };
                    prop_assert_eq!(zone, expect);
                }
                (None, Some((_, zone))) => prop_assert!(matches!(zone, PlaneZone::Open | PlaneZone::Outside)),
                (None, None) => {}
                (Some(_), None) => prop_assert!(false, "hit without crossing"),
            }
        }
    }
}
