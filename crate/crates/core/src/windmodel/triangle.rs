//! The wind triangle: ground velocity = air velocity + wind.

use super::{ModelError, WindVector};

/// Wind split into (along-track, cross-track) components for a ground track.
/// Cross-track is positive when the wind pushes to the right of the track.
pub fn track_components(wind: &WindVector, track_deg: f64) -> (f64, f64) {
    let t = track_deg.to_radians();
    let (s, c) = t.sin_cos();
    let along = wind.u_kt * s + wind.v_kt * c;
    let cross = wind.u_kt * c - wind.v_kt * s;
    (along, cross)
}

/// Ground speed achieved while holding `track_deg` at `airspeed_kt` in `wind`.
///
/// Errors when the crosswind is at least the airspeed (the track cannot be
/// held) or when the headwind leaves no forward progress along the track.
pub fn predict_ground_speed(wind: &WindVector, track_deg: f64, airspeed_kt: f64) -> Result<f64, ModelError> {
    if !(airspeed_kt > 0.0) {
        return Err(ModelError::InvalidInput(format!("airspeed {airspeed_kt} must be positive")));
    }
    let (along, cross) = track_components(wind, track_deg);
    if cross.abs() >= airspeed_kt {
        return Err(ModelError::InfeasibleTrack {
            crosswind_kt: cross,
            airspeed_kt,
        });
    }
    let gs = along + (airspeed_kt * airspeed_kt - cross * cross).sqrt();
    if gs <= 0.0 {
        return Err(ModelError::NoForwardProgress { ground_speed_kt: gs });
    }
    Ok(gs)
}

/// Heading to fly so the ground track equals `track_deg` (crab into the wind).
pub fn heading_for_track(wind: &WindVector, track_deg: f64, airspeed_kt: f64) -> Result<f64, ModelError> {
    let (_, cross) = track_components(wind, track_deg);
    if cross.abs() >= airspeed_kt {
        return Err(ModelError::InfeasibleTrack {
            crosswind_kt: cross,
            airspeed_kt,
        });
    }
    Ok(crate::geo::normalize_bearing(track_deg - (cross / airspeed_kt).asin().to_degrees()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_cases() {
        assert_eq!(predict_ground_speed(&WindVector::CALM, 123.0, 250.0).unwrap(), 250.0);
        // 50 kt tailwind on a northbound track
        assert_eq!(predict_ground_speed(&WindVector::new(0.0, 50.0), 0.0, 250.0).unwrap(), 300.0);
        // 70 kt from the west across a northbound track
        assert_eq!(predict_ground_speed(&WindVector::new(70.0, 0.0), 0.0, 250.0).unwrap(), 240.0);
    }

    #[test]
    fn infeasible_crosswind() {
        let err = predict_ground_speed(&WindVector::new(250.0, 0.0), 0.0, 250.0).unwrap_err();
        assert!(matches!(err, ModelError::InfeasibleTrack { .. }));
        assert!(predict_ground_speed(&WindVector::new(0.0, -260.0), 0.0, 250.0).is_err());
    }

    #[test]
    fn crab_angle_points_into_wind() {
        // wind from the west pushes east; hold north by turning left
        let hdg = heading_for_track(&WindVector::new(50.0, 0.0), 0.0, 250.0).unwrap();
        assert!(hdg > 340.0 && hdg < 360.0);
        let air = WindVector::from_course_speed(hdg, 250.0);
        let ground = air + WindVector::new(50.0, 0.0);
        assert!(ground.u_kt.abs() < 1e-9);
        assert!((ground.v_kt - predict_ground_speed(&WindVector::new(50.0, 0.0), 0.0, 250.0).unwrap()).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn bounded_and_monotone(u in -200.0f64..200.0, v in -200.0f64..200.0, track in 0.0f64..360.0, a in 100.0f64..500.0) {
            let w = WindVector::new(u, v);
            if let Ok(gs) = predict_ground_speed(&w, track, a) {
                prop_assert!(gs >= a - w.speed() - 1e-9 && gs <= a + w.speed() + 1e-9);
                // more tailwind at the same crosswind is never slower
                let t = track.to_radians();
                let more = w + WindVector::new(5.0 * t.sin(), 5.0 * t.cos());
                let gs2 = predict_ground_speed(&more, track, a).unwrap();
                prop_assert!(gs2 > gs);
            }
        }
    }
}
