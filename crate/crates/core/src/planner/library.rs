use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::geo::{final_bearing_deg, normalize_bearing, project_nm, GeoPoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Course relative to the trajectory's start heading, positive to the right.
    pub heading_change_deg: f64,
    pub length_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn length_nm(&self) -> f64 {
        self.segments.iter().map(|s| s.length_nm).sum()
    }

    pub fn final_heading_change_deg(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.heading_change_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibraryConfig {
    pub count: usize,
    pub arc_length_nm: f64,
    pub fan_halfwidth_deg: f64,
    pub segments_per_trajectory: usize,
}

impl Default for LibraryConfig {
    fn default() -> Self {
        Self {
            count: 15,
            arc_length_nm: 100.0,
            fan_halfwidth_deg: 60.0,
            segments_per_trajectory: 10,
        }
    }
}

impl LibraryConfig {
    pub fn build(&self) -> Result<TrajectoryLibrary, PlannerError> {
        build_fan_library(self.count, self.arc_length_nm, self.fan_halfwidth_deg, self.segments_per_trajectory)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLibrary {
    pub trajectories: Vec<Trajectory>,
    pub arc_length_nm: f64,
    pub fan_halfwidth_deg: f64,
}

impl TrajectoryLibrary {
    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }
}

/// `count` constant-curvature arcs whose final heading changes are evenly
/// spaced over `[-halfwidth, +halfwidth]`. Segment `j` of `m` flies at
/// `(j + 1) / m` of the final heading change, so a one-segment library is a
/// fan of straight legs.
pub fn build_fan_library(
    count: usize,
    arc_length_nm: f64,
    fan_halfwidth_deg: f64,
    segments_per_trajectory: usize,
) -> Result<TrajectoryLibrary, PlannerError> {
    if count < 2 {
        return Err(PlannerError::InvalidLibrary(format!("need at least 2 trajectories, got {count}")));
    }
    if segments_per_trajectory == 0 {
        return Err(PlannerError::InvalidLibrary("need at least one segment".into()));
    }
    if !(arc_length_nm > 0.0 && arc_length_nm.is_finite()) {
        return Err(PlannerError::InvalidLibrary(format!("arc length must be positive, got {arc_length_nm}")));
    }
    if !(fan_halfwidth_deg > 0.0 && fan_halfwidth_deg < 180.0) {
        return Err(PlannerError::InvalidLibrary(format!("fan halfwidth must be in (0, 180), got {fan_halfwidth_deg}")));
    }
    let m = segments_per_trajectory;
    let seg_len = arc_length_nm / m as f64;
    let trajectories = (0..count)
        .map(|k| {
            // symmetric by construction: k and count-1-k are exact negatives
            let s = (2 * k) as f64 - (count - 1) as f64;
            let final_change = fan_halfwidth_deg * s / (count - 1) as f64;
            let segments = (0..m)
                .map(|j| Segment {
                    heading_change_deg: final_change * (j + 1) as f64 / m as f64,
                    length_nm: if j + 1 == m { arc_length_nm - seg_len * (m - 1) as f64 } else { seg_len },
                })
                .collect();
            Trajectory { id: k, segments }
        })
        .collect();
    Ok(TrajectoryLibrary {
        trajectories,
        arc_length_nm,
        fan_halfwidth_deg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RolledSegment {
    pub start: GeoPoint,
    pub end: GeoPoint,
    pub midpoint: GeoPoint,
    /// Ground track at the midpoint.
    pub course_deg: f64,
    pub length_nm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolledTrajectory {
    pub segments: Vec<RolledSegment>,
}

impl RolledTrajectory {
    pub fn end(&self) -> GeoPoint {
        self.segments.last().map(|s| s.end).expect("trajectories have at least one segment")
    }

    pub fn midpoints(&self) -> Vec<GeoPoint> {
        self.segments.iter().map(|s| s.midpoint).collect()
    }

    /// Course over the ground at the end of the first `n` segments, the
    /// start heading for a plan rooted there.
    pub fn course_after(&self, n: usize) -> f64 {
        let seg = &self.segments[n - 1];
        final_bearing_deg(&seg.start, &seg.end).unwrap_or(seg.course_deg)
    }
}

/// Places a trajectory on the sphere. Each segment is a great-circle leg;
/// the start heading is parallel-transported along the legs, so a straight
/// trajectory follows a single great circle.
pub fn rollout(traj: &Trajectory, start: &GeoPoint, start_heading_deg: f64) -> RolledTrajectory {
    let mut p = *start;
    let mut reference = start_heading_deg;
    let mut segments = Vec::with_capacity(traj.segments.len());
    for seg in &traj.segments {
        let bearing = normalize_bearing(reference + seg.heading_change_deg);
        let end = project_nm(&p, bearing, seg.length_nm);
        let midpoint = project_nm(&p, bearing, seg.length_nm / 2.0);
        let course_deg = final_bearing_deg(&p, &midpoint).unwrap_or(bearing);
        let arrive = final_bearing_deg(&p, &end).unwrap_or(bearing);
        reference = normalize_bearing(arrive - seg.heading_change_deg);
        segments.push(RolledSegment {
            start: p,
            end,
            midpoint,
            course_deg,
            length_nm: seg.length_nm,
        });
        p = end;
    }
    RolledTrajectory { segments }
}
