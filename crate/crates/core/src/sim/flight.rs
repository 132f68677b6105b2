//! One simulated flight under a routing policy.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geo::{final_bearing_deg, great_circle_distance_nm, initial_bearing_deg, project_nm, GeoPoint};
use crate::planner::{reward_confidence, rollout, ucb_select, LibraryConfig, PlannerConfig, PlannerError};
use crate::windmodel::{predict_ground_speed, GpRegression, ModelHyperparams, StationObservation, WindField, WindVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Highest upper confidence bound on reward.
    Ucb,
    /// Highest posterior-mean reward.
    Mean,
    /// Great-circle route, no planning.
    Gcr,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Ucb, Policy::Mean, Policy::Gcr];

    pub fn label(&self) -> &'static str {
        match self {
            Policy::Ucb => "ucb",
            Policy::Mean => "mean",
            Policy::Gcr => "gcr",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ucb" => Ok(Policy::Ucb),
            "mean" => Ok(Policy::Mean),
            "gcr" => Ok(Policy::Gcr),
            other => Err(format!("unknown policy {other:?} (expected ucb, mean or gcr)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub cruise_alt_ft: f64,
    /// Leg length for the great-circle baseline and the final approach, nm.
    pub direct_step_nm: f64,
    /// Runs longer than this multiple of the calm-air time are abandoned.
    pub time_cap_factor: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            cruise_alt_ft: 39000.0,
            direct_step_nm: 10.0,
            time_cap_factor: 10.0,
        }
    }
}

/// Everything a flight needs besides the endpoints and the truth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlightSetup {
    pub sim: SimConfig,
    pub planner: PlannerConfig,
    pub library: LibraryConfig,
    pub model: ModelHyperparams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leg {
    pub ground_speed_kt: f64,
    pub course_deg: f64,
    pub wind: WindVector,
    pub length_nm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Waypoint {
    pub point: GeoPoint,
    pub elapsed_s: f64,
    /// The leg that ended here; absent for the start.
    pub leg: Option<Leg>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlightLog {
    pub policy: Policy,
    pub waypoints: Vec<Waypoint>,
    /// Library index chosen at each replan; `None` marks a direct fallback step.
    pub choices: Vec<Option<usize>>,
    pub observations: Vec<StationObservation>,
    pub total_time_s: f64,
    pub distance_flown_nm: f64,
}

impl FlightLog {
    /// Same flight regardless of the policy label.
    pub fn same_flight(&self, other: &FlightLog) -> bool {
        self.waypoints == other.waypoints
            && self.choices == other.choices
            && self.observations == other.observations
            && self.total_time_s == other.total_time_s
    }
}

struct Flight<'a> {
    truth: &'a dyn WindField,
    airspeed: f64,
    log: FlightLog,
    pos: GeoPoint,
    elapsed_s: f64,
    cap_s: f64,
    obs_spacing: f64,
    since_obs: f64,
    obs_noise: Option<Normal<f64>>,
    /// The great-circle baseline does not sample the wind.
    sampling: bool,
    rng: ChaCha8Rng,
}

impl Flight<'_> {
    /// Flies a great-circle leg through the true wind at its midpoint.
    fn fly_leg(&mut self, bearing: f64, length_nm: f64) -> Result<(), SimError> {
        let start = self.pos;
        let end = project_nm(&start, bearing, length_nm);
        let mid = project_nm(&start, bearing, length_nm / 2.0);
        let course = final_bearing_deg(&start, &mid).unwrap_or(bearing);
        let wind = self.truth.wind_at(&mid);
        let gs = predict_ground_speed(&wind, course, self.airspeed).map_err(|e| SimError::Stuck {
            at: mid,
            elapsed_s: self.elapsed_s,
            reason: e.to_string(),
        })?;
        if self.sampling {
            self.sample_along(&start, bearing, length_nm);
        }
        self.elapsed_s += length_nm / gs * 3600.0;
        self.pos = end;
        self.log.distance_flown_nm += length_nm;
        self.log.waypoints.push(Waypoint {
            point: end,
            elapsed_s: self.elapsed_s,
            leg: Some(Leg {
                ground_speed_kt: gs,
                course_deg: course,
                wind,
                length_nm,
            }),
        });
        if self.elapsed_s > self.cap_s {
            return Err(SimError::Timeout {
                elapsed_s: self.elapsed_s,
                cap_s: self.cap_s,
            });
        }
        Ok(())
    }

    /// In-flight wind samples at fixed spacing along the path.
    fn sample_along(&mut self, start: &GeoPoint, bearing: f64, length_nm: f64) {
        let mut offset = self.obs_spacing - self.since_obs;
        while offset <= length_nm {
            let at = project_nm(start, bearing, offset);
            let mut w = self.truth.wind_at(&at);
            if let Some(noise) = &self.obs_noise {
                w = w + WindVector::new(noise.sample(&mut self.rng), noise.sample(&mut self.rng));
            }
            self.log.observations.push(StationObservation::new(at, w));
            offset += self.obs_spacing;
        }
        self.since_obs = length_nm - (offset - self.obs_spacing);
    }

    /// Straight to the goal in legs of at most `step_nm`.
    fn fly_direct(&mut self, goal: &GeoPoint, step_nm: f64) -> Result<(), SimError> {
        loop {
            let d = great_circle_distance_nm(&self.pos, goal);
            if d < 1e-9 {
                return Ok(());
            }
            let bearing = initial_bearing_deg(&self.pos, goal).expect("distinct points");
            if d <= step_nm {
                self.fly_leg(bearing, d)?;
                // land exactly on the goal
                if let Some(last) = self.log.waypoints.last_mut() {
                    last.point = *goal;
                }
                self.pos = *goal;
                return Ok(());
            }
            self.fly_leg(bearing, step_nm)?;
        }
    }
}

/// Flies from `start` to `goal` through `truth` under `policy`.
///
/// The planning policies refit a GP to `prior_stations` plus the wind samples
/// collected so far, score every library trajectory rooted at the current
/// position and heading, and fly the first `replan_segment_count` segments
/// of the chosen one. Inside the goal radius all policies fly direct.
pub fn simulate_flight(
    policy: Policy,
    start: &GeoPoint,
    goal: &GeoPoint,
    truth: &dyn WindField,
    prior_stations: &[StationObservation],
    setup: &FlightSetup,
    seed: u64,
) -> Result<FlightLog, SimError> {
    setup.planner.validate().map_err(SimError::Planner)?;
    let alt = setup.sim.cruise_alt_ft;
    let start = start.with_alt(alt);
    let goal = goal.with_alt(alt);
    let distance = great_circle_distance_nm(&start, &goal);
    let cfg = setup.planner;
    if distance <= cfg.goal_radius_nm {
        return Err(SimError::InvalidRoute(format!(
            "start is already within the goal radius ({distance:.1} nm)"
        )));
    }
    let obs_noise = (cfg.observation_noise_sd_kt > 0.0).then(|| Normal::new(0.0, cfg.observation_noise_sd_kt).expect("finite sd"));
    let mut flight = Flight {
        truth,
        airspeed: cfg.airspeed_kt,
        log: FlightLog {
            policy,
            waypoints: vec![Waypoint {
                point: start,
                elapsed_s: 0.0,
                leg: None,
            }],
            choices: Vec::new(),
            observations: Vec::new(),
            total_time_s: 0.0,
            distance_flown_nm: 0.0,
        },
        pos: start,
        elapsed_s: 0.0,
        cap_s: setup.sim.time_cap_factor * distance / cfg.airspeed_kt * 3600.0,
        obs_spacing: cfg.observation_spacing_nm,
        since_obs: 0.0,
        obs_noise,
        sampling: policy != Policy::Gcr,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };

    match policy {
        Policy::Gcr => flight.fly_direct(&goal, setup.sim.direct_step_nm)?,
        Policy::Ucb | Policy::Mean => {
            let planner = PlannerConfig {
                beta_t_override: if policy == Policy::Mean { Some(0.0) } else { cfg.beta_t_override },
                ..cfg
            };
            let library = setup.library.build().map_err(SimError::Planner)?;
            let k = library.len();
            let mut heading = initial_bearing_deg(&start, &goal).expect("distinct points");
            let mut round = 1;
            let station_var = setup.model.station_noise_variance();
            let sample_var = cfg.observation_noise_sd_kt.powi(2).max(1e-2);
            while great_circle_distance_nm(&flight.pos, &goal) > cfg.goal_radius_nm {
                let mut data = prior_stations.to_vec();
                data.extend(flight.log.observations.iter().copied());
                let mut noise = vec![station_var; prior_stations.len()];
                noise.resize(data.len(), sample_var);
                let gp = GpRegression::fit_with_noise(&data, &noise, &setup.model, None).map_err(SimError::Model)?;

                let rolled: Vec<_> = library.trajectories.iter().map(|t| rollout(t, &flight.pos, heading)).collect();
                let queries: Vec<GeoPoint> = rolled.iter().flat_map(|r| r.midpoints()).collect();
                let post = gp.predict(&queries);
                let mut estimates = Vec::with_capacity(k);
                let mut at = 0;
                for r in &rolled {
                    let n = r.segments.len();
                    estimates.push(
                        reward_confidence(r, &goal, &post.slice(at..at + n), round, k, &planner).map_err(SimError::Planner)?,
                    );
                    at += n;
                }
                // A plan is only followed while it makes progress; past or
                // beside the goal every arc recedes and a direct step is taken.
                let choice = match ucb_select(&estimates) {
                    Ok(i) if estimates[i].mean > 0.0 => Some(i),
                    Ok(_) | Err(PlannerError::NoFeasibleTrajectory) => None,
                    Err(e) => return Err(SimError::Planner(e)),
                };
                match choice {
                    Some(i) => {
                        let n = planner.replan_segment_count.min(rolled[i].segments.len());
                        for seg in &rolled[i].segments[..n] {
                            let bearing = initial_bearing_deg(&seg.start, &seg.end).unwrap_or(seg.course_deg);
                            flight.fly_leg(bearing, seg.length_nm)?;
                        }
                        heading = rolled[i].course_after(n);
                    }
                    None => {
                        let step = library.arc_length_nm / setup.library.segments_per_trajectory as f64;
                        let from = flight.pos;
                        flight.fly_leg(initial_bearing_deg(&from, &goal).expect("outside goal radius"), step)?;
                        heading = final_bearing_deg(&from, &flight.pos).unwrap_or(heading);
                    }
                }
                flight.log.choices.push(choice);
                round += 1;
            }
            flight.fly_direct(&goal, setup.sim.direct_step_nm)?;
        }
    }
    flight.log.total_time_s = flight.elapsed_s;
    Ok(flight.log)
}
