//! Receding-horizon trajectory selection by upper confidence bound over a
//! fixed fan of constant-curvature arcs.

mod library;
mod reward;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use library::{build_fan_library, rollout, LibraryConfig, RolledSegment, RolledTrajectory, Segment, Trajectory, TrajectoryLibrary};
pub use reward::{beta_t, reward_confidence, trajectory_reward, ucb_select, RewardEstimate, TrajectoryReward};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("invalid library parameters: {0}")]
    InvalidLibrary(String),
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("expected {expected} segment winds, got {got}")]
    WindCount { expected: usize, got: usize },
    #[error("no trajectory in the library is flyable in the estimated wind")]
    NoFeasibleTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub airspeed_kt: f64,
    pub goal_radius_nm: f64,
    /// Segments of the chosen trajectory flown before replanning.
    pub replan_segment_count: usize,
    /// Failure probability in the exploration schedule.
    pub ucb_delta: f64,
    /// Fixed exploration weight replacing the schedule; 0 gives the mean policy.
    pub beta_t_override: Option<f64>,
    pub observation_spacing_nm: f64,
    pub observation_noise_sd_kt: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            airspeed_kt: 250.0,
            goal_radius_nm: 25.0,
            replan_segment_count: 2,
            ucb_delta: 0.1,
            beta_t_override: None,
            observation_spacing_nm: 20.0,
            observation_noise_sd_kt: 2.0,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let positive = [
            ("airspeed_kt", self.airspeed_kt),
            ("goal_radius_nm", self.goal_radius_nm),
            ("observation_spacing_nm", self.observation_spacing_nm),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlannerError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.observation_noise_sd_kt >= 0.0 && self.observation_noise_sd_kt.is_finite()) {
            return Err(PlannerError::InvalidConfig("observation_noise_sd_kt must be non-negative".into()));
        }
        if self.replan_segment_count == 0 {
            return Err(PlannerError::InvalidConfig("replan_segment_count must be at least 1".into()));
        }
        if !(self.ucb_delta > 0.0 && self.ucb_delta < 1.0) {
            return Err(PlannerError::InvalidConfig(format!("ucb_delta must be in (0, 1), got {}", self.ucb_delta)));
        }
        if let Some(b) = self.beta_t_override {
            if !(b >= 0.0 && b.is_finite()) {
                return Err(PlannerError::InvalidConfig(format!("beta_t_override must be non-negative, got {b}")));
            }
        }
        Ok(())
    }
}
