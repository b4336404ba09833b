//! Spherical-Earth geometry shared by the constellation, region and baseline code.

use core::ops::{Add, Mul, Sub};

use libm::{asin, atan2, cos, sin, sqrt};
use serde::{Deserialize, Serialize};

/// Mean Earth radius (km).
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Speed of light in vacuum (km/s).
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

const DEG: f64 = core::f64::consts::PI / 180.0;

#[inline]
pub fn to_rad(deg: f64) -> f64 {
    deg * DEG
}

#[inline]
pub fn to_deg(rad: f64) -> f64 {
    rad / DEG
}

/// Earth-centered Cartesian coordinates in km.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    /// Unit vector; the zero vector maps to itself.
    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    /// Rotation about the z axis by `angle` radians (counter-clockwise).
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = (sin(angle), cos(angle));
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// A location on (or above) the spherical Earth.
///
/// Latitude in [-90, 90] degrees, longitude in [-180, 180) degrees,
/// altitude in km above the mean radius.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundPoint {
    pub latitude: f64,
    pub longitude: f64,
    #[serde(default)]
    pub altitude: f64,
}

impl GroundPoint {
    pub const fn new(latitude: f64, longitude: f64) -> Self {
        Self {
            latitude,
            longitude,
            altitude: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude)
            && (-180.0..180.0).contains(&self.longitude)
            && self.altitude.is_finite()
    }

    /// Earth-fixed Cartesian position.
    pub fn to_ecef(&self) -> Vec3 {
        let r = EARTH_RADIUS_KM + self.altitude;
        let (lat, lon) = (to_rad(self.latitude), to_rad(self.longitude));
        Vec3::new(
            r * cos(lat) * cos(lon),
            r * cos(lat) * sin(lon),
            r * sin(lat),
        )
    }

    /// Surface point in the direction of `v`. `v` must be non-zero.
    pub fn from_direction(v: Vec3) -> GroundPoint {
        let u = v.normalized();
        let lat = to_deg(asin(u.z.clamp(-1.0, 1.0)));
        let mut lon = to_deg(atan2(u.y, u.x));
        if lon >= 180.0 {
            lon -= 360.0;
        }
        GroundPoint::new(lat, lon)
    }
}

/// Haversine great-circle distance (km) on the mean-radius sphere.
pub fn great_circle_km(a: &GroundPoint, b: &GroundPoint) -> f64 {
    let (lat1, lat2) = (to_rad(a.latitude), to_rad(b.latitude));
    let dlat = (lat2 - lat1) / 2.0;
    let dlon = to_rad(b.longitude - a.longitude) / 2.0;
    let h = sin(dlat) * sin(dlat) + cos(lat1) * cos(lat2) * sin(dlon) * sin(dlon);
    2.0 * EARTH_RADIUS_KM * asin(sqrt(h.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_meridian() {
        let d = great_circle_km(&GroundPoint::new(0.0, 0.0), &GroundPoint::new(90.0, 0.0));
        assert!((d - EARTH_RADIUS_KM * core::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn direction_round_trip() {
        let p = GroundPoint::new(-33.9, 151.2);
        let q = GroundPoint::from_direction(p.to_ecef());
        assert!((p.latitude - q.latitude).abs() < 1e-9);
        assert!((p.longitude - q.longitude).abs() < 1e-9);
    }

    #[test]
    fn validity_ranges() {
        assert!(GroundPoint::new(90.0, -180.0).is_valid());
        assert!(!GroundPoint::new(90.1, 0.0).is_valid());
        assert!(!GroundPoint::new(0.0, 180.0).is_valid());
    }
}
