//! Spherical-earth geodesy: haversine distance, bearings, forward projection
//! and a local tangent-plane helper.
//!
//! Everything here assumes a sphere of radius [`EARTH_RADIUS_NM`]. At the
//! scales this crate works at (regional routes, wind errors of tens of knots)
//! ellipsoidal corrections are irrelevant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean earth radius in nautical miles.
pub const EARTH_RADIUS_NM: f64 = 3440.065;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    Latitude(f64),
    #[error("longitude {0} is not finite")]
    Longitude(f64),
    #[error("altitude {0} ft must be finite and non-negative")]
    Altitude(f64),
    #[error("bearing undefined between coincident points ({lat_deg}, {lon_deg})")]
    Degenerate { lat_deg: f64, lon_deg: f64 },
}

/// A location on the sphere with an altitude above mean sea level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_ft: f64,
}

impl GeoPoint {
    /// Validates the coordinates and normalizes longitude into [-180, 180).
    pub fn new(lat_deg: f64, lon_deg: f64, alt_ft: f64) -> Result<Self, GeoError> {
        if !lat_deg.is_finite() || !(-90.0..=90.0).contains(&lat_deg) {
            return Err(GeoError::Latitude(lat_deg));
        }
        if !lon_deg.is_finite() {
            return Err(GeoError::Longitude(lon_deg));
        }
        if !alt_ft.is_finite() || alt_ft < 0.0 {
            return Err(GeoError::Altitude(alt_ft));
        }
        Ok(Self {
            lat_deg,
            lon_deg: normalize_lon(lon_deg),
            alt_ft,
        })
    }

    /// Sea-level point. Panics on invalid coordinates; meant for constants and tests.
    pub fn surface(lat_deg: f64, lon_deg: f64) -> Self {
        Self::new(lat_deg, lon_deg, 0.0).expect("valid coordinates")
    }

    pub fn with_alt(self, alt_ft: f64) -> Self {
        Self { alt_ft, ..self }
    }

    /// True when latitude and longitude coincide (altitude ignored).
    pub fn same_position(&self, other: &GeoPoint) -> bool {
        self.lat_deg == other.lat_deg && self.lon_deg == other.lon_deg
    }

    /// Position on a sphere of radius [`EARTH_RADIUS_NM`], earth-centred, in nm.
    pub fn to_ecef_nm(&self) -> [f64; 3] {
        let (lat, lon) = (self.lat_deg.to_radians(), self.lon_deg.to_radians());
        [
            EARTH_RADIUS_NM * lat.cos() * lon.cos(),
            EARTH_RADIUS_NM * lat.cos() * lon.sin(),
            EARTH_RADIUS_NM * lat.sin(),
        ]
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalize_lon(lon_deg: f64) -> f64 {
    let wrapped = (lon_deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return 360.0 for tiny negative inputs
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Wraps an angle into [0, 360).
pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

fn haversine_term(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlat = lat2 - lat1;
    let dlon = b.lon_deg.to_radians() - a.lon_deg.to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    h.clamp(0.0, 1.0)
}

/// Great-circle distance in nautical miles (haversine). Altitude is ignored.
pub fn great_circle_distance_nm(a: &GeoPoint, b: &GeoPoint) -> f64 {
    2.0 * EARTH_RADIUS_NM * haversine_term(a, b).sqrt().asin()
}

/// Straight-line (chord) distance through the sphere in nautical miles.
///
/// Agrees with the great-circle distance to second order at short range and
/// is a true Euclidean distance, so kernels built on it stay positive
/// semidefinite at any separation.
pub fn chord_distance_nm(a: &GeoPoint, b: &GeoPoint) -> f64 {
    2.0 * EARTH_RADIUS_NM * haversine_term(a, b).sqrt()
}

/// Initial great-circle course from `a` to `b`, degrees clockwise from true north.
pub fn initial_bearing_deg(a: &GeoPoint, b: &GeoPoint) -> Result<f64, GeoError> {
    if a.same_position(b) || great_circle_distance_nm(a, b) == 0.0 {
        return Err(GeoError::Degenerate {
            lat_deg: a.lat_deg,
            lon_deg: a.lon_deg,
        });
    }
    let lat1 = a.lat_deg.to_radians();
    let lat2 = b.lat_deg.to_radians();
    let dlon = b.lon_deg.to_radians() - a.lon_deg.to_radians();
    let x = dlon.sin() * lat2.cos();
    let y = lat1.cos() * lat2.sin() - lat1.sin() * lat2.cos() * dlon.cos();
    Ok(normalize_bearing(x.atan2(y).to_degrees()))
}

/// Course on arrival at `b` when flying the great circle from `a`.
pub fn final_bearing_deg(a: &GeoPoint, b: &GeoPoint) -> Result<f64, GeoError> {
    initial_bearing_deg(b, a).map(|back| normalize_bearing(back + 180.0))
}

/// Destination reached by flying `distance_nm` along the great circle that
/// leaves `a` on `bearing_deg`. Altitude is carried over from `a`.
pub fn project_nm(a: &GeoPoint, bearing_deg: f64, distance_nm: f64) -> GeoPoint {
    if distance_nm == 0.0 {
        return *a;
    }
    let delta = distance_nm / EARTH_RADIUS_NM;
    let theta = bearing_deg.to_radians();
    let lat1 = a.lat_deg.to_radians();
    let lon1 = a.lon_deg.to_radians();
    let sin_lat2 = (lat1.sin() * delta.cos() + lat1.cos() * delta.sin() * theta.cos()).clamp(-1.0, 1.0);
    let lat2 = sin_lat2.asin();
    let lon2 = lon1 + (theta.sin() * delta.sin() * lat1.cos()).atan2(delta.cos() - lat1.sin() * sin_lat2);
    GeoPoint {
        lat_deg: lat2.to_degrees(),
        lon_deg: normalize_lon(lon2.to_degrees()),
        alt_ft: a.alt_ft,
    }
}

/// Point a fraction `f` of the way along the great circle from `a` to `b`.
pub fn interpolate(a: &GeoPoint, b: &GeoPoint, f: f64) -> GeoPoint {
    match initial_bearing_deg(a, b) {
        Ok(course) => {
            let mut p = project_nm(a, course, f * great_circle_distance_nm(a, b));
            p.alt_ft = a.alt_ft + f * (b.alt_ft - a.alt_ft);
            p
        }
        Err(_) => *a,
    }
}

/// Azimuthal-equidistant tangent plane around an origin: local coordinates are
/// (nm east, nm north).
///
/// Distances and bearings from the origin are exact. Distances between two
/// arbitrary points within `rho` nm of the origin are distorted by a relative
/// error below `(rho / R)^2 / 2`, about 1% at 500 nm and 10% at 1500 nm,
/// which is the largest extent it should be used for.
#[derive(Debug, Clone, Copy)]
pub struct TangentPlane {
    origin: GeoPoint,
}

impl TangentPlane {
    pub const MAX_EXTENT_NM: f64 = 1500.0;

    pub fn new(origin: GeoPoint) -> Self {
        Self { origin }
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn to_local(&self, p: &GeoPoint) -> (f64, f64) {
        let rho = great_circle_distance_nm(&self.origin, p);
        match initial_bearing_deg(&self.origin, p) {
            Ok(b) => {
                let b = b.to_radians();
                (rho * b.sin(), rho * b.cos())
            }
            Err(_) => (0.0, 0.0),
        }
    }

    pub fn from_local(&self, east_nm: f64, north_nm: f64) -> GeoPoint {
        let rho = east_nm.hypot(north_nm);
        if rho == 0.0 {
            return self.origin;
        }
        project_nm(&self.origin, east_nm.atan2(north_nm).to_degrees(), rho)
    }
}
