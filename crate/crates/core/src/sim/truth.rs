//! Ground-truth wind worlds for simulation.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geo::GeoPoint;
use crate::windmodel::{GpRegression, WindField, WindVector};

/// Upper bound on the magnitude of any truth wind, kt.
pub const MAX_TRUTH_WIND_KT: f64 = 250.0;

/// Smooth random field drawn from a squared-exponential GP, approximated by
/// random Fourier features over earth-centred coordinates plus altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct GpSampleField {
    mean_flow: WindVector,
    amplitude: f64,
    /// Frequencies over (x, y, z in nm; altitude in ft), per component.
    freqs: [Vec<[f64; 4]>; 2],
    phases: [Vec<f64>; 2],
    weights: [Vec<f64>; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpSampleParams {
    /// Background flow the sample varies around, east/north kt.
    pub mean_u_kt: f64,
    pub mean_v_kt: f64,
    pub sd_kt: f64,
    pub lengthscale_h_nm: f64,
    pub lengthscale_v_ft: f64,
    pub features: usize,
}

impl Default for GpSampleParams {
    fn default() -> Self {
        Self {
            mean_u_kt: 0.0,
            mean_v_kt: 0.0,
            sd_kt: 30.0,
            lengthscale_h_nm: 250.0,
            lengthscale_v_ft: 4000.0,
            features: 400,
        }
    }
}

impl GpSampleField {
    pub fn sample(params: &GpSampleParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = params.features.max(1);
        let mut freqs: [Vec<[f64; 4]>; 2] = Default::default();
        let mut phases: [Vec<f64>; 2] = Default::default();
        let mut weights: [Vec<f64>; 2] = Default::default();
        for c in 0..2 {
            for _ in 0..d {
                let z: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                freqs[c].push([
                    z[0] / params.lengthscale_h_nm,
                    z[1] / params.lengthscale_h_nm,
                    z[2] / params.lengthscale_h_nm,
                    z[3] / params.lengthscale_v_ft,
                ]);
                phases[c].push(rng.random_range(0.0..2.0 * PI));
                let w: f64 = StandardNormal.sample(&mut rng);
                weights[c].push(w);
            }
        }
        Self {
            mean_flow: WindVector::new(params.mean_u_kt, params.mean_v_kt),
            amplitude: params.sd_kt * (2.0 / d as f64).sqrt(),
            freqs,
            phases,
            weights,
        }
    }
}

impl WindField for GpSampleField {
    fn wind_at(&self, p: &GeoPoint) -> WindVector {
        let [x, y, z] = p.to_ecef_nm();
        let x = [x, y, z, p.alt_ft];
        let comp = |c: usize| -> f64 {
            let mut s = 0.0;
            for ((f, ph), w) in self.freqs[c].iter().zip(&self.phases[c]).zip(&self.weights[c]) {
                s += w * (f[0] * x[0] + f[1] * x[1] + f[2] * x[2] + f[3] * x[3] + ph).cos();
            }
            self.amplitude * s
        };
        self.mean_flow + WindVector::new(comp(0), comp(1))
    }
}

/// A band of wind blowing along the great circle from `from` toward `to`,
/// strongest on that circle and decaying as a Gaussian across it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetBand {
    pub from: GeoPoint,
    pub to: GeoPoint,
    pub core_speed_kt: f64,
    pub half_width_nm: f64,
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl JetBand {
    fn wind(&self, p: &GeoPoint) -> WindVector {
        let pole = unit(cross3(self.from.to_ecef_nm(), self.to.to_ecef_nm()));
        let r = unit(p.to_ecef_nm());
        let off_nm = dot3(r, pole).clamp(-1.0, 1.0).asin() * crate::geo::EARTH_RADIUS_NM;
        let speed = self.core_speed_kt * (-0.5 * (off_nm / self.half_width_nm).powi(2)).exp();
        // direction of travel along the small circle parallel to the axis
        let along = cross3(pole, r);
        let (lat, lon) = (p.lat_deg.to_radians(), p.lon_deg.to_radians());
        let east = [-lon.sin(), lon.cos(), 0.0];
        let north = [-lat.sin() * lon.cos(), -lat.sin() * lon.sin(), lat.cos()];
        let (e, n) = (dot3(along, east), dot3(along, north));
        let norm = e.hypot(n);
        if norm < 1e-12 {
            return WindVector::CALM;
        }
        WindVector::new(speed * e / norm, speed * n / norm)
    }
}

#[derive(Clone)]
pub enum GroundTruthWindField {
    Uniform(WindVector),
    JetBand(JetBand),
    GpSample(GpSampleField),
    /// Posterior mean of a GP conditioned on a forecast snapshot.
    Conditioned(GpRegression),
    /// Sum of a base field and a jet band.
    WithJet(Box<GroundTruthWindField>, JetBand),
}

impl std::fmt::Debug for GroundTruthWindField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform(w) => f.debug_tuple("Uniform").field(w).finish(),
            Self::JetBand(j) => f.debug_tuple("JetBand").field(j).finish(),
            Self::GpSample(_) => f.write_str("GpSample"),
            Self::Conditioned(_) => f.write_str("Conditioned"),
            Self::WithJet(b, j) => f.debug_tuple("WithJet").field(b).field(j).finish(),
        }
    }
}

impl GroundTruthWindField {
    fn raw(&self, p: &GeoPoint) -> WindVector {
        match self {
            Self::Uniform(w) => *w,
            Self::JetBand(j) => j.wind(p),
            Self::GpSample(g) => g.wind_at(p),
            Self::Conditioned(g) => g.wind_at(p),
            Self::WithJet(base, j) => base.raw(p) + j.wind(p),
        }
    }
}

impl WindField for GroundTruthWindField {
    fn wind_at(&self, p: &GeoPoint) -> WindVector {
        let w = self.raw(p);
        let s = w.speed();
        if s > MAX_TRUTH_WIND_KT {
            w * (MAX_TRUTH_WIND_KT / s)
        } else {
            w
        }
    }
}
