//! Wind-field estimation from forecast stations and aircraft reports, and
//! wind-aware flight routing.
//!
//! * [`geo`]: spherical-earth distances, bearings and projection.
//! * [`windmodel`]: GP regression, the station/aircraft fusion model and its
//!   Laplace approximation, the wind triangle, leave-one-aircraft-out scoring.
//! * [`ingest`]: winds-aloft bulletins, station directories and aircraft
//!   report tables.
//! * [`planner`]: trajectory library, rollout rewards and UCB selection.
//! * [`sim`]: ground-truth worlds, flight simulation, seeded experiments and
//!   synthetic evaluation worlds.

pub mod geo;
pub mod ingest;
pub mod planner;
pub mod sim;
pub mod windmodel;
