//! Walker-style LEO shell with circular two-body propagation, plus the
//! visibility and latency predicates the topology is built from.

use alloc::vec::Vec;

use libm::{asin, cos, sin, sqrt};
use serde::{Deserialize, Serialize};

use crate::geo::{to_deg, to_rad, GroundPoint, Vec3, EARTH_RADIUS_KM, SPEED_OF_LIGHT_KM_S};
use crate::ConfigError;

/// Earth gravitational parameter (km^3/s^2).
pub const MU_EARTH: f64 = 398_600.441_8;
/// Sidereal rotation rate of the Earth (rad/s).
pub const EARTH_ROTATION_RAD_S: f64 = 7.292_115_9e-5;
/// Minimum elevation for a user-satellite link (degrees).
pub const MIN_ELEVATION_DEG: f64 = 25.0;
/// Height above the surface an ISL line of sight must clear (km).
pub const ISL_CLEARANCE_KM: f64 = 80.0;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// One orbital shell: `num_orbits` planes of `sats_per_orbit` satellites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    pub num_orbits: u32,
    pub sats_per_orbit: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    #[serde(default = "default_phase_factor")]
    pub phase_factor: u32,
    #[serde(default = "default_earth_radius")]
    pub earth_radius_km: f64,
    #[serde(default)]
    pub epoch_s: f64,
}

fn default_phase_factor() -> u32 {
    1
}

fn default_earth_radius() -> f64 {
    EARTH_RADIUS_KM
}

impl ShellConfig {
    pub fn new(
        num_orbits: u32,
        sats_per_orbit: u32,
        altitude_km: f64,
        inclination_deg: f64,
        phase_factor: u32,
    ) -> Result<Self, ConfigError> {
        let shell = Self {
            num_orbits,
            sats_per_orbit,
            altitude_km,
            inclination_deg,
            phase_factor,
            earth_radius_km: EARTH_RADIUS_KM,
            epoch_s: 0.0,
        };
        shell.validate()?;
        Ok(shell)
    }

    /// Starlink phase-1 style shell: 24 planes of 66 satellites at 550 km, 53 degrees.
    pub fn starlink_phase1() -> Self {
        Self::new(24, 66, 550.0, 53.0, 1).expect("valid preset")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.num_orbits == 0 || self.sats_per_orbit == 0 {
            return Err(ConfigError::Invalid(
                "shell needs at least one orbit and one satellite per orbit",
            ));
        }
        if !(self.altitude_km > 0.0) {
            return Err(ConfigError::Invalid("shell altitude must be positive"));
        }
        if self.phase_factor >= self.num_orbits {
            return Err(ConfigError::Invalid(
                "phase factor must be below the number of orbits",
            ));
        }
        if !(self.earth_radius_km > 0.0)
            || !self.inclination_deg.is_finite()
            || !self.epoch_s.is_finite()
        {
            return Err(ConfigError::Invalid("shell geometry must be finite"));
        }
        Ok(())
    }

    pub fn num_satellites(&self) -> u32 {
        self.num_orbits * self.sats_per_orbit
    }

    pub fn orbit_radius_km(&self) -> f64 {
        self.earth_radius_km + self.altitude_km
    }

    /// Circular orbital period (s).
    pub fn period_s(&self) -> f64 {
        let a = self.orbit_radius_km();
        TWO_PI * sqrt(a * a * a / MU_EARTH)
    }

    pub fn sat_id(&self, orbit_index: u32, slot_index: u32) -> u32 {
        orbit_index * self.sats_per_orbit + slot_index
    }

    /// `(orbit_index, slot_index)` of a satellite id.
    pub fn split_id(&self, sat_id: u32) -> (u32, u32) {
        (sat_id / self.sats_per_orbit, sat_id % self.sats_per_orbit)
    }

    /// The +Grid neighbor ids of `sat_id`: previous and next slot in the same
    /// orbit, same slot in the two adjacent orbits (both wrapping). Duplicates
    /// and self-references collapse, so small shells yield fewer than four.
    pub fn grid_neighbors(&self, sat_id: u32) -> Vec<u32> {
        let (orbit, slot) = self.split_id(sat_id);
        let (p, s) = (self.num_orbits, self.sats_per_orbit);
        let mut out = Vec::with_capacity(4);
        for id in [
            self.sat_id(orbit, (slot + s - 1) % s),
            self.sat_id(orbit, (slot + 1) % s),
            self.sat_id((orbit + p - 1) % p, slot),
            self.sat_id((orbit + 1) % p, slot),
        ] {
            if id != sat_id && !out.contains(&id) {
                out.push(id);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Position of one satellite at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub sat_id: u32,
    pub orbit_index: u32,
    pub slot_index: u32,
    /// Earth-fixed position (km).
    pub position: Vec3,
    /// Seconds since the shell epoch.
    pub time: f64,
}

fn inertial_position(shell: &ShellConfig, orbit: u32, slot: u32, elapsed: f64) -> Vec3 {
    let a = shell.orbit_radius_km();
    let mean_motion = sqrt(MU_EARTH / (a * a * a));
    let (p, s) = (shell.num_orbits as f64, shell.sats_per_orbit as f64);
    let raan = TWO_PI * orbit as f64 / p;
    let phase =
        TWO_PI * slot as f64 / s + TWO_PI * (shell.phase_factor as f64) * orbit as f64 / (p * s);
    let u = phase + mean_motion * elapsed;
    let inc = to_rad(shell.inclination_deg);
    let (su, cu) = (sin(u), cos(u));
    let (so, co) = (sin(raan), cos(raan));
    let ci = cos(inc);
    Vec3::new(
        a * (cu * co - su * ci * so),
        a * (cu * so + su * ci * co),
        a * su * sin(inc),
    )
}

fn states(shell: &ShellConfig, t: f64, earth_fixed: bool) -> Vec<SatelliteState> {
    let elapsed = shell.epoch_s + t;
    let rotation = if earth_fixed {
        -EARTH_ROTATION_RAD_S * elapsed
    } else {
        0.0
    };
    let mut out = Vec::with_capacity(shell.num_satellites() as usize);
    for orbit in 0..shell.num_orbits {
        for slot in 0..shell.sats_per_orbit {
            let position = inertial_position(shell, orbit, slot, elapsed).rotate_z(rotation);
            out.push(SatelliteState {
                sat_id: shell.sat_id(orbit, slot),
                orbit_index: orbit,
                slot_index: slot,
                position,
                time: t,
            });
        }
    }
    out
}

/// Earth-fixed positions of every satellite `t` seconds after the shell epoch,
/// ordered by `sat_id`.
pub fn propagate(shell: &ShellConfig, t: f64) -> Vec<SatelliteState> {
    states(shell, t, true)
}

/// Same as [`propagate`] but in the non-rotating frame.
pub fn propagate_inertial(shell: &ShellConfig, t: f64) -> Vec<SatelliteState> {
    states(shell, t, false)
}

/// Smallest distance from the Earth's center to the segment `p`-`q`.
pub fn segment_min_radius(p: Vec3, q: Vec3) -> f64 {
    let d = q - p;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-p.dot(d) / len2).clamp(0.0, 1.0);
    (p + d * t).norm()
}

/// Whether an inter-satellite link can exist between `a` and `b`.
pub fn isl_visible(a: &SatelliteState, b: &SatelliteState, shell: &ShellConfig) -> bool {
    if a.sat_id == b.sat_id || !shell.grid_neighbors(a.sat_id).contains(&b.sat_id) {
        return false;
    }
    segment_min_radius(a.position, b.position) >= shell.earth_radius_km + ISL_CLEARANCE_KM
}

/// Elevation (degrees) of `target` above the local horizon at `u`.
pub fn elevation_deg(u: &GroundPoint, target: Vec3) -> f64 {
    let up = u.to_ecef();
    let los = target - up;
    let range = los.norm();
    if range == 0.0 {
        return 90.0;
    }
    to_deg(asin((los.dot(up.normalized()) / range).clamp(-1.0, 1.0)))
}

/// Whether the user at `u` can reach satellite `s`. The threshold is
/// inclusive up to 1e-9 degrees of rounding.
pub fn usl_visible(u: &GroundPoint, s: &SatelliteState) -> bool {
    elevation_deg(u, s.position) >= MIN_ELEVATION_DEG - 1e-9
}

/// One-way free-space propagation delay between two points (ms).
pub fn propagation_latency_ms(p: Vec3, q: Vec3) -> f64 {
    p.distance(q) / SPEED_OF_LIGHT_KM_S * 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell(p: u32, s: u32) -> ShellConfig {
        ShellConfig::new(p, s, 550.0, 53.0, 0).unwrap()
    }

    #[test]
    fn rejects_bad_config() {
        assert!(ShellConfig::new(0, 1, 550.0, 53.0, 0).is_err());
        assert!(ShellConfig::new(1, 0, 550.0, 53.0, 0).is_err());
        assert!(ShellConfig::new(1, 1, 0.0, 53.0, 0).is_err());
        assert!(ShellConfig::new(4, 1, 550.0, 53.0, 4).is_err());
    }

    #[test]
    fn single_satellite_radius() {
        let states = propagate(&shell(1, 1), 0.0);
        assert_eq!(states.len(), 1);
        assert!((states[0].position.norm() - 6921.0).abs() < 1e-6);
    }

    #[test]
    fn ids_are_bijective() {
        let sh = shell(5, 7);
        let states = propagate(&sh, 12.0);
        for (i, s) in states.iter().enumerate() {
            assert_eq!(s.sat_id as usize, i);
            assert_eq!(sh.sat_id(s.orbit_index, s.slot_index), s.sat_id);
        }
    }

    #[test]
    fn inertial_periodicity() {
        let sh = shell(3, 8);
        let a = propagate_inertial(&sh, 0.0);
        let b = propagate_inertial(&sh, sh.period_s());
        for (x, y) in a.iter().zip(&b) {
            assert!(x.position.distance(y.position) < 1e-6);
        }
    }

    #[test]
    fn grid_neighbor_degenerate_shells() {
        assert!(shell(1, 1).grid_neighbors(0).is_empty());
        assert_eq!(shell(1, 2).grid_neighbors(0), [1]);
        assert_eq!(shell(2, 1).grid_neighbors(1), [0]);
        assert_eq!(shell(4, 4).grid_neighbors(0), [1, 3, 4, 12]);
    }

    #[test]
    fn isl_adjacency_rules() {
        let sh = shell(1, 22);
        let st = propagate(&sh, 0.0);
        assert!(isl_visible(&st[0], &st[1], &sh));
        assert!(isl_visible(&st[0], &st[21], &sh));
        assert!(!isl_visible(&st[0], &st[0], &sh));
        assert!(!isl_visible(&st[0], &st[2], &sh));
    }

    #[test]
    fn zenith_and_antipode() {
        let u = GroundPoint::new(10.0, 20.0);
        let above = GroundPoint {
            altitude: 550.0,
            ..u
        }
        .to_ecef();
        let s = SatelliteState {
            sat_id: 0,
            orbit_index: 0,
            slot_index: 0,
            position: above,
            time: 0.0,
        };
        assert!(usl_visible(&u, &s));
        let s = SatelliteState {
            position: above * -1.0,
            ..s
        };
        assert!(!usl_visible(&u, &s));
    }

    #[test]
    fn latency_zero_and_symmetric() {
        let p = Vec3::new(1.0, 2.0, 3.0);
        let q = Vec3::new(-400.0, 7.0, 9000.0);
        assert_eq!(propagation_latency_ms(p, p), 0.0);
        assert_eq!(propagation_latency_ms(p, q), propagation_latency_ms(q, p));
    }
}
