use serde::Serialize;

use super::{PlannerConfig, PlannerError, RolledTrajectory};
use crate::geo::{great_circle_distance_nm, GeoPoint};
use crate::windmodel::{predict_ground_speed, WindPosterior, WindVector};

/// Finite-difference step for the reward's wind sensitivity, kt.
const WIND_STEP_KT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryReward {
    /// Rate of closing distance to the goal, nm/h. Negative when moving away.
    pub reward_nm_per_h: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardEstimate {
    pub mean: f64,
    pub sd: f64,
    pub ucb: f64,
    pub feasible: bool,
}

impl RewardEstimate {
    pub const INFEASIBLE: RewardEstimate = RewardEstimate {
        mean: f64::NEG_INFINITY,
        sd: 0.0,
        ucb: f64::NEG_INFINITY,
        feasible: false,
    };
}

/// Goal progress per unit time when flying `traj` through one wind per
/// segment. `Ok(None)` when some segment cannot be flown.
pub fn trajectory_reward(
    traj: &RolledTrajectory,
    goal: &GeoPoint,
    winds: &[WindVector],
    airspeed_kt: f64,
) -> Result<Option<TrajectoryReward>, PlannerError> {
    if winds.len() != traj.segments.len() {
        return Err(PlannerError::WindCount {
            expected: traj.segments.len(),
            got: winds.len(),
        });
    }
    let mut hours = 0.0;
    for (seg, w) in traj.segments.iter().zip(winds) {
        match predict_ground_speed(w, seg.course_deg, airspeed_kt) {
            Ok(gs) => hours += seg.length_nm / gs,
            Err(_) => return Ok(None),
        }
    }
    let start = traj.segments[0].start;
    let progress = great_circle_distance_nm(&start, goal) - great_circle_distance_nm(&traj.end(), goal);
    Ok(Some(TrajectoryReward {
        reward_nm_per_h: progress / hours,
        time_s: hours * 3600.0,
    }))
}

/// Exploration weight `2 ln(K t^2 pi^2 / (6 delta))` for round `t >= 1`.
pub fn beta_t(k: usize, t: usize, delta: f64) -> f64 {
    let t = t.max(1) as f64;
    2.0 * (k as f64 * t * t * std::f64::consts::PI.powi(2) / (6.0 * delta)).ln()
}

/// Reward at the posterior mean winds with a first-order standard deviation:
/// each segment wind component is perturbed by a central difference and the
/// sensitivities are combined assuming independent segments.
pub fn reward_confidence(
    traj: &RolledTrajectory,
    goal: &GeoPoint,
    posterior: &WindPosterior,
    round: usize,
    library_size: usize,
    config: &PlannerConfig,
) -> Result<RewardEstimate, PlannerError> {
    let a = config.airspeed_kt;
    let Some(at_mean) = trajectory_reward(traj, goal, &posterior.mean, a)? else {
        return Ok(RewardEstimate::INFEASIBLE);
    };
    let mean = at_mean.reward_nm_per_h;
    let mut winds = posterior.mean.clone();
    let mut var = 0.0;
    for i in 0..winds.len() {
        for c in 0..2 {
            let sd = posterior.sd[i][c];
            if sd == 0.0 {
                continue;
            }
            let base = winds[i];
            let mut shifted = |delta: f64| {
                let mut w = base;
                if c == 0 {
                    w.u_kt += delta;
                } else {
                    w.v_kt += delta;
                }
                winds[i] = w;
                let r = trajectory_reward(traj, goal, &winds, a).ok().flatten().map(|r| r.reward_nm_per_h);
                winds[i] = base;
                r
            };
            let deriv = match (shifted(WIND_STEP_KT), shifted(-WIND_STEP_KT)) {
                (Some(p), Some(m)) => (p - m) / (2.0 * WIND_STEP_KT),
                (Some(p), None) => (p - mean) / WIND_STEP_KT,
                (None, Some(m)) => (mean - m) / WIND_STEP_KT,
                (None, None) => 0.0,
            };
            var += deriv * deriv * sd * sd;
        }
    }
    let sd = var.sqrt();
    let beta = config
        .beta_t_override
        .unwrap_or_else(|| beta_t(library_size, round, config.ucb_delta));
    Ok(RewardEstimate {
        mean,
        sd,
        ucb: mean + beta.sqrt() * sd,
        feasible: true,
    })
}

/// Index of the largest upper bound among feasible estimates, lowest index
/// on ties.
pub fn ucb_select(estimates: &[RewardEstimate]) -> Result<usize, PlannerError> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in estimates.iter().enumerate() {
        if !e.feasible || e.ucb.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| e.ucb > b) {
            best = Some((i, e.ucb));
        }
    }
    best.map(|(i, _)| i).ok_or(PlannerError::NoFeasibleTrajectory)
}
