//! Leave-one-aircraft-out ground-speed evaluation of wind estimates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::laplace::{laplace_fit, LaplaceOptions};
use super::triangle::{predict_ground_speed, track_components};
use super::{gp::GpRegression, AircraftReport, ModelError, ModelHyperparams, StationObservation, WindVector};
use crate::geo::great_circle_distance_nm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LooMethod {
    /// Wind of the closest station.
    NearestNeighbor,
    /// Station-only GP regression.
    Gpr,
    /// Stations plus every other aircraft through the Laplace fusion.
    Laplace,
}

impl LooMethod {
    pub const ALL: [LooMethod; 3] = [LooMethod::NearestNeighbor, LooMethod::Gpr, LooMethod::Laplace];

    pub fn label(&self) -> &'static str {
        match self {
            LooMethod::NearestNeighbor => "nearest-neighbor",
            LooMethod::Gpr => "gpr",
            LooMethod::Laplace => "laplace",
        }
    }
}

impl fmt::Display for LooMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LooMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest-neighbor" | "nn" => Ok(LooMethod::NearestNeighbor),
            "gpr" => Ok(LooMethod::Gpr),
            "laplace" => Ok(LooMethod::Laplace),
            other => Err(format!("unknown method {other:?} (expected nearest-neighbor, gpr or laplace)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooPrediction {
    pub report_index: usize,
    pub aircraft_id: String,
    pub predicted_gs_kt: f64,
    pub observed_gs_kt: f64,
    /// The predicted wind made the track infeasible; the prediction was
    /// clamped to the along-track solution.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LooReport {
    pub method: LooMethod,
    pub rmse_kt: f64,
    pub n_aircraft: usize,
    pub clamped: usize,
    pub predictions: Vec<LooPrediction>,
}

fn nearest_station(stations: &[StationObservation], report: &AircraftReport) -> WindVector {
    stations
        .iter()
        .map(|s| (great_circle_distance_nm(&s.site, &report.site), s.wind))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, w)| w)
        .unwrap_or(WindVector::CALM)
}

fn ground_speed_prediction(wind: &WindVector, report: &AircraftReport) -> (f64, bool) {
    let track = report.track_deg();
    match predict_ground_speed(wind, track, report.airspeed_kt) {
        Ok(gs) => (gs, false),
        Err(_) => {
            let (along, cross) = track_components(wind, track);
            let a = report.airspeed_kt;
            (along + (a * a - cross * cross).max(0.0).sqrt(), true)
        }
    }
}

/// Holds out each aircraft (all reports sharing its id) in turn, predicts the
/// wind at its report sites from the remaining data, and scores the implied
/// ground speed against the observed one.
pub fn loo_ground_speed_rmse(
    reports: &[AircraftReport],
    stations: &[StationObservation],
    method: LooMethod,
    h: &ModelHyperparams,
    opts: &LaplaceOptions,
) -> Result<LooReport, ModelError> {
    let mut ids: Vec<&str> = Vec::new();
    for r in reports {
        if !ids.contains(&r.aircraft_id.as_str()) {
            ids.push(&r.aircraft_id);
        }
    }
    if ids.len() < 2 {
        return Err(ModelError::InsufficientAircraft(ids.len()));
    }
    if stations.is_empty() {
        return Err(ModelError::NoStations);
    }

    let gpr = match method {
        LooMethod::Gpr => Some(GpRegression::fit(stations, h)?),
        _ => None,
    };

    let per_aircraft: Vec<Result<Vec<LooPrediction>, ModelError>> = ids
        .par_iter()
        .map(|id| {
            let held: Vec<usize> = (0..reports.len()).filter(|&i| reports[i].aircraft_id == *id).collect();
            let winds: Vec<WindVector> = match method {
                LooMethod::NearestNeighbor => held.iter().map(|&i| nearest_station(stations, &reports[i])).collect(),
                LooMethod::Gpr => {
                    let sites: Vec<_> = held.iter().map(|&i| reports[i].site).collect();
                    gpr.as_ref().expect("fitted above").predict(&sites).mean
                }
                LooMethod::Laplace => {
                    let others: Vec<AircraftReport> =
                        reports.iter().filter(|r| r.aircraft_id != *id).cloned().collect();
                    let sites: Vec<_> = held.iter().map(|&i| reports[i].site).collect();
                    laplace_fit(stations, &others, h, opts)?.predict(&sites).mean
                }
            };
            Ok(held
                .iter()
                .zip(winds)
                .map(|(&i, w)| {
                    let (predicted, clamped) = ground_speed_prediction(&w, &reports[i]);
                    LooPrediction {
                        report_index: i,
                        aircraft_id: reports[i].aircraft_id.clone(),
                        predicted_gs_kt: predicted,
                        observed_gs_kt: reports[i].ground_speed_kt(),
                        clamped,
                    }
                })
                .collect())
        })
        .collect();

    let mut predictions = Vec::with_capacity(reports.len());
    for p in per_aircraft {
        predictions.extend(p?);
    }
    predictions.sort_by_key(|p| p.report_index);
    let sq: f64 = predictions.iter().map(|p| (p.predicted_gs_kt - p.observed_gs_kt).powi(2)).sum();
    Ok(LooReport {
        method,
        rmse_kt: (sq / predictions.len() as f64).sqrt(),
        n_aircraft: ids.len(),
        clamped: predictions.iter().filter(|p| p.clamped).count(),
        predictions,
    })
}
