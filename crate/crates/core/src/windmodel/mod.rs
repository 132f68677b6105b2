//! Probabilistic wind model: GP prior over the latent wind field, Gaussian
//! station likelihood, wind-triangle potential for aircraft reports, and the
//! Laplace-approximate posterior.

mod gp;
pub mod kernel;
pub mod laplace;
mod loo;
mod triangle;
mod types;

use thiserror::Error;

use crate::geo::GeoPoint;

pub use gp::{gp_regress, merge_duplicate_stations, GpRegression, PriorMean};
pub use kernel::kernel_eval;
pub use laplace::{
    laplace_fit, laplace_fuse, neg_log_posterior, FusionProblem, LaplaceFit, LaplaceOptions, LatentLayout,
    PosteriorVariance, SolveStats,
};
pub use loo::{loo_ground_speed_rmse, LooMethod, LooPrediction, LooReport};
pub use triangle::{heading_for_track, predict_ground_speed, track_components};
pub use types::{AircraftReport, ModelHyperparams, StationObservation, WindField, WindPosterior, WindVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("at least one station observation is required")]
    NoStations,
    #[error("leave-one-aircraft-out needs at least 2 aircraft, got {0}")]
    InsufficientAircraft(usize),
    #[error(
        "covariance is singular after jitter; sites {first_index} ({:.5}, {:.5}) and {second_index} ({:.5}, {:.5}) are nearly coincident",
        first.lat_deg, first.lon_deg, second.lat_deg, second.lon_deg
    )]
    IllConditioned {
        first_index: usize,
        second_index: usize,
        first: GeoPoint,
        second: GeoPoint,
    },
    #[error("mode search did not converge after {iterations} Newton iterations (gradient norm {grad_norm:.3e})")]
    NotConverged { grad_norm: f64, iterations: usize },
    #[error("mode search stopped at a saddle point (min Hessian eigenvalue {min_eigenvalue:.3e}); try a different initialization")]
    SaddlePoint { min_eigenvalue: f64 },
    #[error("crosswind {crosswind_kt:.1} kt is not below airspeed {airspeed_kt:.1} kt; track cannot be held")]
    InfeasibleTrack { crosswind_kt: f64, airspeed_kt: f64 },
    #[error("headwind leaves no forward progress (ground speed {ground_speed_kt:.1} kt)")]
    NoForwardProgress { ground_speed_kt: f64 },
}

impl ModelError {
    /// True for the wind-triangle failures (the track cannot be flown).
    pub fn is_infeasible(&self) -> bool {
        matches!(self, ModelError::InfeasibleTrack { .. } | ModelError::NoForwardProgress { .. })
    }
}
