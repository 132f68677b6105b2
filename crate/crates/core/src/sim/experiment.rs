//! Repeated flights over varying wind worlds, aggregated per policy.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::flight::{simulate_flight, FlightLog, FlightSetup, Policy};
use super::truth::{GpSampleField, GpSampleParams, GroundTruthWindField, JetBand};
use super::SimError;
use crate::geo::{great_circle_distance_nm, initial_bearing_deg, interpolate, GeoPoint, TangentPlane};
use crate::windmodel::{GpRegression, ModelHyperparams, StationObservation, WindField, WindVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub name: String,
    pub start: GeoPoint,
    pub goal: GeoPoint,
}

impl Route {
    pub fn distance_nm(&self) -> f64 {
        great_circle_distance_nm(&self.start, &self.goal)
    }
}

/// Greenville-Spartanburg to Canyonlands (about 1340 nm) and Seattle to Miami.
pub fn builtin_routes() -> Vec<Route> {
    let p = |lat, lon| GeoPoint::new(lat, lon, 0.0).expect("valid coordinates");
    vec![
        Route {
            name: "sc-ut".into(),
            start: p(34.8957, -82.2189),
            goal: p(38.755, -109.7548),
        },
        Route {
            name: "sea-mia".into(),
            start: p(47.45, -122.31),
            goal: p(25.79, -80.29),
        },
    ]
}

/// How the true wind is generated for each repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruthSource {
    Calm,
    Uniform { u_kt: f64, v_kt: f64 },
    /// Uniform wind expressed against the route's initial course; positive
    /// `crosswind_kt` blows from the left of the route.
    RouteRelative { headwind_kt: f64, crosswind_kt: f64 },
    /// A band blowing along the route from goal to start, optionally over a
    /// GP-sample background.
    HeadwindJet {
        core_speed_kt: f64,
        half_width_nm: f64,
        #[serde(default)]
        background: Option<GpSampleParams>,
    },
    /// A fresh GP sample per repetition.
    GpSample(GpSampleParams),
    /// GP posterior mean conditioned on one forecast snapshot per
    /// repetition (cycled when there are more repetitions than snapshots).
    #[serde(skip)]
    Snapshots {
        snapshots: Arc<Vec<Vec<StationObservation>>>,
        model: ModelHyperparams,
    },
}

impl TruthSource {
    pub fn realize(&self, route: &Route, repetition: usize, seed: u64) -> Result<GroundTruthWindField, SimError> {
        let heading = initial_bearing_deg(&route.start, &route.goal)
            .map_err(|e| SimError::InvalidRoute(e.to_string()))?;
        Ok(match self {
            TruthSource::Calm => GroundTruthWindField::Uniform(WindVector::CALM),
            TruthSource::Uniform { u_kt, v_kt } => GroundTruthWindField::Uniform(WindVector::new(*u_kt, *v_kt)),
            TruthSource::RouteRelative {
                headwind_kt,
                crosswind_kt,
            } => {
                let head = WindVector::from_course_speed(heading, -headwind_kt);
                let cross = WindVector::from_course_speed(heading + 90.0, *crosswind_kt);
                GroundTruthWindField::Uniform(head + cross)
            }
            TruthSource::HeadwindJet {
                core_speed_kt,
                half_width_nm,
                background,
            } => {
                let jet = JetBand {
                    from: route.goal,
                    to: route.start,
                    core_speed_kt: *core_speed_kt,
                    half_width_nm: *half_width_nm,
                };
                match background {
                    Some(p) => GroundTruthWindField::WithJet(Box::new(GroundTruthWindField::GpSample(GpSampleField::sample(p, seed))), jet),
                    None => GroundTruthWindField::JetBand(jet),
                }
            }
            TruthSource::GpSample(p) => GroundTruthWindField::GpSample(GpSampleField::sample(p, seed)),
            TruthSource::Snapshots { snapshots, model } => {
                if snapshots.is_empty() {
                    return Err(SimError::InvalidExperiment("no forecast snapshots".into()));
                }
                let s = &snapshots[repetition % snapshots.len()];
                GroundTruthWindField::Conditioned(GpRegression::fit(s, model).map_err(SimError::Model)?)
            }
        })
    }
}

/// Synthetic forecast stations on a regular grid around a route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StationLatticeConfig {
    pub spacing_nm: f64,
    pub margin_nm: f64,
    /// Forecast error added to the true wind at each station, per component.
    pub forecast_noise_sd_kt: f64,
}

impl Default for StationLatticeConfig {
    fn default() -> Self {
        Self {
            spacing_nm: 200.0,
            margin_nm: 300.0,
            forecast_noise_sd_kt: 5.0,
        }
    }
}

/// Stations on a grid in the tangent plane at the route midpoint, covering
/// both endpoints plus `margin_nm`, reporting the true wind plus noise.
pub fn station_lattice(
    route: &Route,
    truth: &dyn WindField,
    cfg: &StationLatticeConfig,
    alt_ft: f64,
    seed: u64,
) -> Result<Vec<StationObservation>, SimError> {
    if !(cfg.spacing_nm > 0.0 && cfg.margin_nm >= 0.0 && cfg.forecast_noise_sd_kt >= 0.0) {
        return Err(SimError::InvalidExperiment(format!("bad station lattice {cfg:?}")));
    }
    let plane = TangentPlane::new(interpolate(&route.start, &route.goal, 0.5));
    let (ax, ay) = plane.to_local(&route.start);
    let (bx, by) = plane.to_local(&route.goal);
    let (x0, x1) = (ax.min(bx) - cfg.margin_nm, ax.max(bx) + cfg.margin_nm);
    let (y0, y1) = (ay.min(by) - cfg.margin_nm, ay.max(by) + cfg.margin_nm);
    let nx = ((x1 - x0) / cfg.spacing_nm).floor() as usize + 1;
    let ny = ((y1 - y0) / cfg.spacing_nm).floor() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, cfg.forecast_noise_sd_kt).map_err(|e| SimError::InvalidExperiment(e.to_string()))?;
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            // centre the grid in the box
            let x = x0 + (x1 - x0 - (nx - 1) as f64 * cfg.spacing_nm) / 2.0 + i as f64 * cfg.spacing_nm;
            let y = y0 + (y1 - y0 - (ny - 1) as f64 * cfg.spacing_nm) / 2.0 + j as f64 * cfg.spacing_nm;
            let site = plane.from_local(x, y).with_alt(alt_ft);
            let w = truth.wind_at(&site) + WindVector::new(noise.sample(&mut rng), noise.sample(&mut rng));
            out.push(StationObservation::new(site, w));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub routes: Vec<Route>,
    pub truth: TruthSource,
    pub policies: Vec<Policy>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub stations: StationLatticeConfig,
    pub setup: FlightSetup,
}

/// The world shared by every policy in one (route, repetition) cell.
pub struct RepetitionWorld {
    pub truth: GroundTruthWindField,
    pub stations: Vec<StationObservation>,
    pub flight_seed: u64,
    pub seed: u64,
}

impl ExperimentSpec {
    /// Seed of repetition `r`, independent of route and policy.
    pub fn repetition_seed(&self, r: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base_seed);
        rng.set_stream(r as u64);
        rng.next_u64()
    }

    /// Six-hour slot label: four slots per simulated day.
    pub fn slot_label(r: usize) -> String {
        format!("d{:02}s{}", r / 4 + 1, r % 4)
    }

    pub fn world(&self, route: &Route, r: usize) -> Result<RepetitionWorld, SimError> {
        let seed = self.repetition_seed(r);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth_seed = rng.next_u64();
        let station_seed = rng.next_u64();
        let flight_seed = rng.next_u64();
        let truth = self.truth.realize(route, r, truth_seed)?;
        let stations = station_lattice(route, &truth, &self.stations, self.setup.sim.cruise_alt_ft, station_seed)?;
        Ok(RepetitionWorld {
            truth,
            stations,
            flight_seed,
            seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub route: String,
    pub policy: Policy,
    pub repetition: usize,
    pub slot: String,
    pub seed: u64,
    pub result: Result<FlightLog, SimError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicySummary {
    pub policy: Policy,
    pub route: String,
    pub mean_s: f64,
    /// Sample standard deviation over successful repetitions; 0 for one run.
    pub sd_s: f64,
    pub n: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub rows: Vec<PolicySummary>,
}

impl ExperimentReport {
    pub fn row(&self, route: &str, policy: Policy) -> Option<&PolicySummary> {
        self.rows.iter().find(|r| r.route == route && r.policy == policy)
    }
}

pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub runs: Vec<RunRecord>,
}

/// Flies every policy on every route for each repetition. Repetitions run in
/// parallel; results are ordered by route, repetition, then policy, and do
/// not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome, SimError> {
    if spec.repetitions == 0 {
        return Err(SimError::InvalidExperiment("repetitions must be at least 1".into()));
    }
    if spec.policies.is_empty() || spec.routes.is_empty() {
        return Err(SimError::InvalidExperiment("need at least one route and one policy".into()));
    }
    let cells: Vec<(usize, usize)> = (0..spec.routes.len())
        .flat_map(|ri| (0..spec.repetitions).map(move |r| (ri, r)))
        .collect();
    let per_cell: Vec<Vec<RunRecord>> = cells
        .par_iter()
        .map(|&(ri, r)| {
            let route = &spec.routes[ri];
            let world = spec.world(route, r);
            spec.policies
                .iter()
                .map(|&policy| {
                    let result = world.as_ref().map_err(Clone::clone).and_then(|w| {
                        simulate_flight(policy, &route.start, &route.goal, &w.truth, &w.stations, &spec.setup, w.flight_seed)
                    });
                    RunRecord {
                        route: route.name.clone(),
                        policy,
                        repetition: r,
                        slot: ExperimentSpec::slot_label(r),
                        seed: spec.repetition_seed(r),
                        result,
                    }
                })
                .collect()
        })
        .collect();
    let runs: Vec<RunRecord> = per_cell.into_iter().flatten().collect();

    let mut rows = Vec::new();
    for route in &spec.routes {
        for &policy in &spec.policies {
            let times: Vec<f64> = runs
                .iter()
                .filter(|r| r.route == route.name && r.policy == policy)
                .filter_map(|r| r.result.as_ref().ok().map(|l| l.total_time_s))
                .collect();
            let failures = spec.repetitions - times.len();
            let n = times.len();
            let mean_s = if n == 0 { f64::NAN } else { times.iter().sum::<f64>() / n as f64 };
            let sd_s = if n < 2 {
                0.0
            } else {
                (times.iter().map(|t| (t - mean_s).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            rows.push(PolicySummary {
                policy,
                route: route.name.clone(),
                mean_s,
                sd_s,
                n,
                failures,
            });
        }
    }
    Ok(ExperimentOutcome {
        report: ExperimentReport { rows },
        runs,
    })
}
