//! Text serializations of flights and experiment reports.

use std::fmt::Write as _;

use serde_json::json;

use super::{ExperimentReport, FlightLog};

/// One JSON object per waypoint.
pub fn flight_jsonl(log: &FlightLog) -> String {
    let mut out = String::new();
    for w in &log.waypoints {
        let leg = w.leg.as_ref();
        let rec = json!({
            "policy": log.policy.label(),
            "lat_deg": w.point.lat_deg,
            "lon_deg": w.point.lon_deg,
            "alt_ft": w.point.alt_ft,
            "elapsed_s": w.elapsed_s,
            "ground_speed_kt": leg.map(|l| l.ground_speed_kt),
            "course_deg": leg.map(|l| l.course_deg),
            "wind_u_kt": leg.map(|l| l.wind.u_kt),
            "wind_v_kt": leg.map(|l| l.wind.v_kt),
        });
        out.push_str(&rec.to_string());
        out.push('\n');
    }
    out
}

/// The flown path as a GeoJSON feature collection with one LineString.
pub fn flight_geojson(log: &FlightLog, route: &str) -> String {
    let coords: Vec<[f64; 2]> = log.waypoints.iter().map(|w| [w.point.lon_deg, w.point.lat_deg]).collect();
    let doc = json!({
        "type": "FeatureCollection",
        "features": [{
            "type": "Feature",
            "geometry": { "type": "LineString", "coordinates": coords },
            "properties": {
                "policy": log.policy.label(),
                "route": route,
                "total_time_s": log.total_time_s,
                "distance_flown_nm": log.distance_flown_nm,
                "observations": log.observations.len(),
            }
        }]
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

/// `policy,route,mean_s,sd_s,n,failures`, one row per (route, policy).
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("policy,route,mean_s,sd_s,n,failures\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{:.3},{:.3},{},{}", r.policy, r.route, r.mean_s, r.sd_s, r.n, r.failures);
    }
    out
}
