//! Seeded synthetic worlds for model evaluation: a known GP wind field,
//! noisy forecast stations and noisy aircraft reports drawn from it.

use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::truth::{GpSampleField, GpSampleParams};
use super::SimError;
use crate::geo::{project_nm, GeoPoint};
use crate::ingest::{AircraftReportTable, AircraftRow, FbGroup, StationDirectory, ValidTime, WindsAloftBulletin};
use crate::windmodel::{AircraftReport, StationObservation, WindField, WindVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Region {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
}

impl Default for Region {
    /// Roughly Washington, Oregon and California.
    fn default() -> Self {
        Self {
            lat_min_deg: 32.5,
            lat_max_deg: 49.0,
            lon_min_deg: -124.5,
            lon_max_deg: -114.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub stations: usize,
    pub aircraft: usize,
    pub reports_per_aircraft: usize,
    pub report_spacing_nm: f64,
    /// Per-component noise on station winds and aircraft ground velocities.
    pub noise_sd_kt: f64,
    pub level_ft: u32,
    pub airspeed_min_kt: f64,
    pub airspeed_max_kt: f64,
    pub region: Region,
    pub field: GpSampleParams,
    /// Noise-free world in which every estimator can be exact: station winds
    /// are the truth rounded to bulletin precision, and each aircraft makes a
    /// single report at a station site, flying through that station's wind.
    pub self_consistent: bool,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            stations: 10,
            aircraft: 30,
            reports_per_aircraft: 3,
            report_spacing_nm: 40.0,
            noise_sd_kt: 5.0,
            level_ft: 39000,
            airspeed_min_kt: 230.0,
            airspeed_max_kt: 270.0,
            region: Region::default(),
            field: GpSampleParams::default(),
            self_consistent: false,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let r = &self.region;
        let bad = |m: String| Err(SimError::InvalidExperiment(m));
        if self.stations == 0 || self.aircraft == 0 || self.reports_per_aircraft == 0 {
            return bad("synthetic world needs at least one station, aircraft and report".into());
        }
        if !(r.lat_min_deg < r.lat_max_deg && r.lat_min_deg >= -85.0 && r.lat_max_deg <= 85.0 && r.lon_min_deg < r.lon_max_deg) {
            return bad(format!("bad region {r:?}"));
        }
        if !(self.noise_sd_kt >= 0.0 && self.report_spacing_nm > 0.0) {
            return bad("noise must be non-negative and report spacing positive".into());
        }
        if !(self.airspeed_min_kt > 0.0 && self.airspeed_min_kt <= self.airspeed_max_kt && self.airspeed_max_kt < AircraftReport::MAX_AIRSPEED_KT) {
            return bad(format!("bad airspeed range {}..{}", self.airspeed_min_kt, self.airspeed_max_kt));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub truth: GpSampleField,
    pub level_ft: u32,
    pub station_codes: Vec<String>,
    pub stations: Vec<StationObservation>,
    pub reports: Vec<AircraftReport>,
}

/// Three-letter code for station `i`: SAA, SAB, ...
fn station_code(i: usize) -> String {
    let a = (b'A' + (i / 26 % 26) as u8) as char;
    let b = (b'A' + (i % 26) as u8) as char;
    format!("S{a}{b}")
}

pub fn synthetic_world(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticWorld, SimError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = GpSampleField::sample(&cfg.field, rng.random());
    let noise = Normal::new(0.0, cfg.noise_sd_kt).map_err(|e| SimError::InvalidExperiment(e.to_string()))?;
    let alt = cfg.level_ft as f64;
    let r = cfg.region;
    let random_site = |rng: &mut ChaCha8Rng| {
        GeoPoint::new(
            rng.random_range(r.lat_min_deg..r.lat_max_deg),
            rng.random_range(r.lon_min_deg..r.lon_max_deg),
            alt,
        )
        .expect("region validated")
    };

    let mut station_codes = Vec::with_capacity(cfg.stations);
    let mut stations = Vec::with_capacity(cfg.stations);
    for i in 0..cfg.stations {
        let site = random_site(&mut rng);
        let w = if cfg.self_consistent {
            FbGroup::from_wind(truth.wind_at(&site), None).wind().expect("not missing")
        } else {
            truth.wind_at(&site) + WindVector::new(noise.sample(&mut rng), noise.sample(&mut rng))
        };
        station_codes.push(station_code(i));
        stations.push(StationObservation::new(site, w));
    }

    let mut reports = Vec::with_capacity(cfg.aircraft * cfg.reports_per_aircraft);
    for a in 0..cfg.aircraft {
        let id = format!("N{:03}", a + 1);
        let heading: f64 = rng.random_range(0.0..360.0);
        let tas = rng.random_range(cfg.airspeed_min_kt..=cfg.airspeed_max_kt);
        if cfg.self_consistent {
            let s = &stations[a % stations.len()];
            let ground = WindVector::from_course_speed(heading, tas) + s.wind;
            reports.push(AircraftReport::new(id, s.site, ground, tas).map_err(SimError::Model)?);
            continue;
        }
        let mut site = random_site(&mut rng);
        for _ in 0..cfg.reports_per_aircraft {
            let ground = WindVector::from_course_speed(heading, tas)
                + truth.wind_at(&site)
                + WindVector::new(noise.sample(&mut rng), noise.sample(&mut rng));
            reports.push(AircraftReport::new(id.clone(), site, ground, tas).map_err(SimError::Model)?);
            site = project_nm(&site, heading, cfg.report_spacing_nm);
        }
    }
    Ok(SyntheticWorld {
        truth,
        level_ft: cfg.level_ft,
        station_codes,
        stations,
        reports,
    })
}

impl SyntheticWorld {
    pub fn directory(&self) -> StationDirectory {
        let mut dir = StationDirectory::default();
        for (code, s) in self.station_codes.iter().zip(&self.stations) {
            dir.insert(code.clone(), s.site.with_alt(0.0)).expect("codes are unique");
        }
        dir
    }

    /// The station winds as a single-level bulletin, rounded to FB precision.
    pub fn bulletin(&self, valid_time: ValidTime) -> WindsAloftBulletin {
        let entries = self
            .station_codes
            .iter()
            .zip(&self.stations)
            .map(|(code, s)| (code.clone(), vec![FbGroup::from_wind(s.wind, None)]))
            .collect();
        WindsAloftBulletin {
            valid_time: Some(valid_time),
            levels_ft: vec![self.level_ft],
            entries,
        }
    }

    /// Reports as table rows, one minute apart per aircraft from `start`.
    pub fn aircraft_table(&self, start: DateTime<Utc>) -> AircraftReportTable {
        let mut rows = Vec::with_capacity(self.reports.len());
        let mut k = 0;
        for (i, r) in self.reports.iter().enumerate() {
            if i > 0 && self.reports[i - 1].aircraft_id != r.aircraft_id {
                k = 0;
            }
            rows.push(AircraftRow {
                time_utc: start + Duration::minutes(k),
                report: r.clone(),
            });
            k += 1;
        }
        AircraftReportTable { rows }
    }
}
