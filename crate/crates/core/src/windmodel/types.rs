use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::geo::GeoPoint;

/// Horizontal wind (or wind-shaped velocity) in knots: `u` east, `v` north.
///
/// The components describe where the air is moving TO, unlike the
/// meteorological direction which names where it comes FROM.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindVector {
    pub u_kt: f64,
    pub v_kt: f64,
}

impl WindVector {
    /// Sanity bound on any single component.
    pub const MAX_COMPONENT_KT: f64 = 500.0;

    pub const CALM: WindVector = WindVector { u_kt: 0.0, v_kt: 0.0 };

    pub const fn new(u_kt: f64, v_kt: f64) -> Self {
        Self { u_kt, v_kt }
    }

    pub fn checked(u_kt: f64, v_kt: f64) -> Result<Self, ModelError> {
        let w = Self { u_kt, v_kt };
        if w.is_valid() {
            Ok(w)
        } else {
            Err(ModelError::InvalidInput(format!("wind ({u_kt}, {v_kt}) kt out of range")))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.u_kt.is_finite()
            && self.v_kt.is_finite()
            && self.u_kt.abs() < Self::MAX_COMPONENT_KT
            && self.v_kt.abs() < Self::MAX_COMPONENT_KT
    }

    /// Wind blowing FROM `direction_deg` at `speed_kt` (meteorological convention).
    pub fn from_direction_speed(direction_from_deg: f64, speed_kt: f64) -> Self {
        let d = direction_from_deg.to_radians();
        Self {
            u_kt: -speed_kt * d.sin(),
            v_kt: -speed_kt * d.cos(),
        }
    }

    /// Velocity moving TOWARD `course_deg` at `speed_kt`.
    pub fn from_course_speed(course_deg: f64, speed_kt: f64) -> Self {
        let c = course_deg.to_radians();
        Self {
            u_kt: speed_kt * c.sin(),
            v_kt: speed_kt * c.cos(),
        }
    }

    pub fn speed(&self) -> f64 {
        self.u_kt.hypot(self.v_kt)
    }

    /// Course the vector points toward, [0, 360).
    pub fn course_deg(&self) -> f64 {
        crate::geo::normalize_bearing(self.u_kt.atan2(self.v_kt).to_degrees())
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.u_kt, self.v_kt]
    }

    pub fn component(&self, c: usize) -> f64 {
        if c == 0 {
            self.u_kt
        } else {
            self.v_kt
        }
    }
}

impl Add for WindVector {
    type Output = WindVector;
    fn add(self, rhs: WindVector) -> WindVector {
        WindVector::new(self.u_kt + rhs.u_kt, self.v_kt + rhs.v_kt)
    }
}

impl Sub for WindVector {
    type Output = WindVector;
    fn sub(self, rhs: WindVector) -> WindVector {
        WindVector::new(self.u_kt - rhs.u_kt, self.v_kt - rhs.v_kt)
    }
}

impl Neg for WindVector {
    type Output = WindVector;
    fn neg(self) -> WindVector {
        WindVector::new(-self.u_kt, -self.v_kt)
    }
}

impl Mul<f64> for WindVector {
    type Output = WindVector;
    fn mul(self, k: f64) -> WindVector {
        WindVector::new(self.u_kt * k, self.v_kt * k)
    }
}

/// Anything that can report a wind at a location: ground-truth worlds,
/// forecast fields used as a prior mean, fitted posteriors.
pub trait WindField: Send + Sync {
    fn wind_at(&self, p: &GeoPoint) -> WindVector;
}

impl<F: Fn(&GeoPoint) -> WindVector + Send + Sync> WindField for F {
    fn wind_at(&self, p: &GeoPoint) -> WindVector {
        self(p)
    }
}

/// A wind report from a forecast station (or any direct wind measurement).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationObservation {
    pub site: GeoPoint,
    pub wind: WindVector,
}

impl StationObservation {
    pub fn new(site: GeoPoint, wind: WindVector) -> Self {
        Self { site, wind }
    }
}

/// Ground velocity and true airspeed reported by one aircraft at one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftReport {
    pub aircraft_id: String,
    pub site: GeoPoint,
    pub ground_velocity: WindVector,
    pub airspeed_kt: f64,
}

impl AircraftReport {
    pub const MAX_AIRSPEED_KT: f64 = 700.0;
    pub const MAX_GROUND_SPEED_KT: f64 = 900.0;

    pub fn new(
        aircraft_id: impl Into<String>,
        site: GeoPoint,
        ground_velocity: WindVector,
        airspeed_kt: f64,
    ) -> Result<Self, ModelError> {
        let gs = ground_velocity.speed();
        if !(airspeed_kt > 0.0 && airspeed_kt < Self::MAX_AIRSPEED_KT) {
            return Err(ModelError::InvalidInput(format!("airspeed {airspeed_kt} kt outside (0, 700)")));
        }
        if !(gs > 0.0 && gs < Self::MAX_GROUND_SPEED_KT) {
            return Err(ModelError::InvalidInput(format!("ground speed {gs} kt outside (0, 900)")));
        }
        Ok(Self {
            aircraft_id: aircraft_id.into(),
            site,
            ground_velocity,
            airspeed_kt,
        })
    }

    pub fn ground_speed_kt(&self) -> f64 {
        self.ground_velocity.speed()
    }

    pub fn track_deg(&self) -> f64 {
        self.ground_velocity.course_deg()
    }
}

/// Kernel and likelihood parameters of the fusion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelHyperparams {
    pub lengthscale_h_nm: f64,
    pub lengthscale_v_ft: f64,
    pub signal_sd_kt: f64,
    /// Standard deviation of the station likelihood.
    pub station_noise_sd_kt: f64,
    /// Sharpness of the wind-triangle potential, kt^-2.
    pub aircraft_beta: f64,
    /// Added to the prior Gram diagonal, kt^2.
    pub jitter: f64,
}

impl Default for ModelHyperparams {
    fn default() -> Self {
        Self {
            lengthscale_h_nm: 250.0,
            lengthscale_v_ft: 4000.0,
            signal_sd_kt: 30.0,
            station_noise_sd_kt: 5.0,
            aircraft_beta: 0.02,
            jitter: 1e-3,
        }
    }
}

impl ModelHyperparams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("lengthscale_h_nm", self.lengthscale_h_nm),
            ("lengthscale_v_ft", self.lengthscale_v_ft),
            ("signal_sd_kt", self.signal_sd_kt),
            ("station_noise_sd_kt", self.station_noise_sd_kt),
            ("aircraft_beta", self.aircraft_beta),
            ("jitter", self.jitter),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidHyperparams(format!("{name} = {value} must be positive")));
            }
        }
        if self.jitter > 1e-4 * self.signal_sd_kt.powi(2) {
            return Err(ModelError::InvalidHyperparams(format!(
                "jitter {} exceeds 1e-4 * signal_sd^2 = {}",
                self.jitter,
                1e-4 * self.signal_sd_kt.powi(2)
            )));
        }
        Ok(())
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_sd_kt * self.signal_sd_kt
    }

    pub fn station_noise_variance(&self) -> f64 {
        self.station_noise_sd_kt * self.station_noise_sd_kt
    }
}

/// Posterior over the latent wind at a list of query sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindPosterior {
    pub sites: Vec<GeoPoint>,
    pub mean: Vec<WindVector>,
    /// Per-site standard deviation of the `u` and `v` components, knots.
    pub sd: Vec<[f64; 2]>,
}

impl WindPosterior {
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> WindPosterior {
        WindPosterior {
            sites: self.sites[range.clone()].to_vec(),
            mean: self.mean[range.clone()].to_vec(),
            sd: self.sd[range].to_vec(),
        }
    }

    /// Same sites and means with every standard deviation multiplied by `k`.
    pub fn scaled_sd(&self, k: f64) -> WindPosterior {
        WindPosterior {
            sd: self.sd.iter().map(|s| [s[0] * k, s[1] * k]).collect(),
            ..self.clone()
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.sites.len() == self.mean.len()
            && self.sites.len() == self.sd.len()
            && self.sd.iter().all(|s| s[0] >= 0.0 && s[1] >= 0.0)
    }
}
