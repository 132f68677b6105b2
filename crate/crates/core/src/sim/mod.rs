//! Flight simulation against a known wind world and the repeated-trial
//! benchmark of routing policies.

mod experiment;
mod flight;
pub mod output;
mod synthetic;
mod truth;

use thiserror::Error;

use crate::geo::GeoPoint;
use crate::planner::PlannerError;
use crate::windmodel::ModelError;

pub use experiment::{
    builtin_routes, run_experiment, station_lattice, ExperimentOutcome, ExperimentReport, ExperimentSpec, PolicySummary,
    RepetitionWorld, Route, RunRecord, StationLatticeConfig, TruthSource,
};
pub use flight::{simulate_flight, FlightLog, FlightSetup, Leg, Policy, SimConfig, Waypoint};
pub use synthetic::{synthetic_world, Region, SyntheticConfig, SyntheticWorld};
pub use truth::{GpSampleField, GpSampleParams, GroundTruthWindField, JetBand, MAX_TRUTH_WIND_KT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error("aircraft stuck near ({:.3}, {:.3}) after {elapsed_s:.0} s: {reason}", at.lat_deg, at.lon_deg)]
    Stuck { at: GeoPoint, elapsed_s: f64, reason: String },
    #[error("flight exceeded the time cap ({elapsed_s:.0} s > {cap_s:.0} s)")]
    Timeout { elapsed_s: f64, cap_s: f64 },
    #[error(transparent)]
    Planner(PlannerError),
    #[error(transparent)]
    Model(ModelError),
    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
}
