use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;
use windroute_core::geo::{project_nm, GeoPoint};
use windroute_core::ingest::{
    fb_to_station_observations, parse_bulletin, read_aircraft_csv, read_station_directory, write_aircraft_csv,
    write_bulletin, write_station_directory, ValidTime,
};
use windroute_core::sim::{output, run_experiment, synthetic_world, ExperimentOutcome, ExperimentSpec};
use windroute_core::windmodel::{
    gp_regress, laplace_fuse, loo_ground_speed_rmse, AircraftReport, LaplaceOptions, LooReport, StationObservation,
    WindPosterior,
};

use crate::config::{FuseMethod, RunConfig};
use crate::error::CliError;
use crate::fsio::write_atomic;

/// Station and aircraft data at the configured level.
pub struct LevelData {
    pub stations: Vec<StationObservation>,
    pub aircraft: Vec<AircraftReport>,
    pub warnings: Vec<String>,
}

pub fn load_level_data(cfg: &RunConfig, need_aircraft: bool) -> Result<LevelData, CliError> {
    let bulletin_path = cfg.require_file("bulletin", &cfg.data.bulletin)?;
    let dir_path = cfg.require_file("stations", &cfg.data.stations)?;
    let aircraft_path = match (&cfg.data.aircraft, need_aircraft) {
        (None, false) => None,
        (p, _) => Some(cfg.require_file("aircraft", p)?),
    };
    let text = crate::fsio::read_to_string(&bulletin_path)?;
    let bulletin = parse_bulletin(&text)?;
    let directory = read_station_directory(&dir_path)?;
    let level = fb_to_station_observations(&bulletin, &directory, cfg.data.level_ft, cfg.data.include_calm)?;
    let mut warnings = level.warnings;
    if !level.calm.is_empty() {
        let verb = if cfg.data.include_calm { "kept as calm" } else { "dropped" };
        warnings.push(format!("light and variable at {}: {verb}", level.calm.join(" ")));
    }
    let aircraft = match aircraft_path {
        Some(p) => read_aircraft_csv(&p)?.near_level(cfg.data.level_ft as f64, cfg.data.altitude_band_ft),
        None => Vec::new(),
    };
    Ok(LevelData {
        stations: level.observations,
        aircraft,
        warnings,
    })
}

pub struct FuseResult {
    pub method: FuseMethod,
    pub nodes: Vec<GeoPoint>,
    pub posterior: WindPosterior,
    pub stations: usize,
    pub aircraft: usize,
    pub warnings: Vec<String>,
}

pub fn fuse(cfg: &RunConfig) -> Result<FuseResult, CliError> {
    let data = load_level_data(cfg, false)?;
    let nodes = cfg.fuse.grid.nodes(cfg.data.level_ft as f64);
    let posterior = match cfg.fuse.method {
        FuseMethod::Gpr => gp_regress(&data.stations, &nodes, &cfg.model)?,
        FuseMethod::Laplace => {
            let opts = LaplaceOptions {
                variance: cfg.fuse.variance,
                ..LaplaceOptions::default()
            };
            laplace_fuse(&data.stations, &data.aircraft, &nodes, &cfg.model, &opts)?
        }
    };
    Ok(FuseResult {
        method: cfg.fuse.method,
        nodes,
        posterior,
        stations: data.stations.len(),
        aircraft: if cfg.fuse.method == FuseMethod::Gpr { 0 } else { data.aircraft.len() },
        warnings: data.warnings,
    })
}

/// Rounds to the printed precision and folds `-0` into `0`, so that fits
/// agreeing to rounding print identically.
fn round6(x: f64) -> f64 {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// One record per grid node under a `# method=` line. Speed and direction
/// are derived from the rounded components; a zero wind has direction 0.
pub fn fuse_grid_csv(r: &FuseResult) -> String {
    let mut out = format!("# method={}\n", r.method.label());
    out.push_str("lat_deg,lon_deg,alt_ft,u_kt,v_kt,sd_u_kt,sd_v_kt,speed_kt,direction_from_deg\n");
    for ((p, w), sd) in r.nodes.iter().zip(&r.posterior.mean).zip(&r.posterior.sd) {
        let (u, v) = (round6(w.u_kt), round6(w.v_kt));
        let speed = u.hypot(v);
        let from = if speed == 0.0 { 0.0 } else { (u.atan2(v).to_degrees() + 180.0).rem_euclid(360.0) };
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.0},{:.6},{:.6},{:.6},{:.6},{:.6},{:.2}",
            p.lat_deg,
            p.lon_deg,
            p.alt_ft,
            u,
            v,
            round6(sd[0]),
            round6(sd[1]),
            speed,
            from
        );
    }
    out
}

/// Each node as a line from the node downwind, `arrow_nm_per_kt` long per knot.
pub fn fuse_geojson(r: &FuseResult, arrow_nm_per_kt: f64) -> String {
    let features: Vec<_> = r
        .nodes
        .iter()
        .zip(&r.posterior.mean)
        .zip(&r.posterior.sd)
        .map(|((p, w), sd)| {
            let tip = project_nm(p, w.course_deg(), w.speed() * arrow_nm_per_kt);
            json!({
                "type": "Feature",
                "geometry": {
                    "type": "LineString",
                    "coordinates": [[p.lon_deg, p.lat_deg], [tip.lon_deg, tip.lat_deg]],
                },
                "properties": {
                    "u_kt": w.u_kt,
                    "v_kt": w.v_kt,
                    "speed_kt": w.speed(),
                    "sd_u_kt": sd[0],
                    "sd_v_kt": sd[1],
                },
            })
        })
        .collect();
    let doc = json!({
        "type": "FeatureCollection",
        "properties": { "method": r.method.label() },
        "features": features,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

pub fn cmd_fuse(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let r = fuse(cfg)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    let grid = cfg.output.dir.join("fused_grid.csv");
    let arrows = cfg.output.dir.join("fused_arrows.geojson");
    write_atomic(&grid, &fuse_grid_csv(&r))?;
    write_atomic(&arrows, &fuse_geojson(&r, cfg.fuse.arrow_nm_per_kt))?;
    eprintln!(
        "fused {} stations and {} aircraft reports onto {} nodes ({})",
        r.stations,
        r.aircraft,
        r.nodes.len(),
        r.method.label()
    );
    Ok(vec![grid, arrows])
}

pub fn loo(cfg: &RunConfig) -> Result<Vec<LooReport>, CliError> {
    let data = load_level_data(cfg, true)?;
    for w in &data.warnings {
        eprintln!("warning: {w}");
    }
    let opts = LaplaceOptions::default();
    cfg.loo
        .methods
        .iter()
        .map(|&m| loo_ground_speed_rmse(&data.aircraft, &data.stations, m, &cfg.model, &opts).map_err(CliError::from))
        .collect()
}

pub fn loo_csv(reports: &[LooReport]) -> String {
    let mut out = String::from("method,rmse_kt,n_aircraft,clamped\n");
    for r in reports {
        let _ = writeln!(out, "{},{:.4},{},{}", r.method, r.rmse_kt, r.n_aircraft, r.clamped);
    }
    out
}

pub fn cmd_loo(cfg: &RunConfig) -> Result<String, CliError> {
    let csv = loo_csv(&loo(cfg)?);
    write_atomic(&cfg.output.dir.join("loo.csv"), &csv)?;
    Ok(csv)
}

pub fn experiment_spec(cfg: &RunConfig) -> Result<ExperimentSpec, CliError> {
    Ok(ExperimentSpec {
        routes: cfg.routes()?,
        truth: cfg.truth.clone(),
        policies: cfg.experiment.policies.clone(),
        repetitions: cfg.experiment.repetitions,
        base_seed: cfg.experiment.base_seed,
        stations: cfg.stations,
        setup: cfg.setup(),
    })
}

/// Runs the experiment and writes `report.csv` plus a GeoJSON track and a
/// waypoint log per successful flight under `flights/<route>/`. Failed
/// flights are listed in the error after everything else is written.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<ExperimentOutcome, CliError> {
    let spec = experiment_spec(cfg)?;
    let outcome = run_experiment(&spec)?;
    let dir = &cfg.output.dir;
    let mut details = String::new();
    let mut failed = 0;
    for run in &outcome.runs {
        match &run.result {
            Ok(log) => {
                let stem = dir.join("flights").join(&run.route).join(format!("{}_{}", run.slot, run.policy));
                write_atomic(&stem.with_extension("geojson"), &output::flight_geojson(log, &run.route))?;
                write_atomic(&stem.with_extension("jsonl"), &output::flight_jsonl(log))?;
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(
                    details,
                    "  route {} repetition {} ({}, seed {}) policy {}: {e}",
                    run.route, run.repetition, run.slot, run.seed, run.policy
                );
            }
        }
    }
    write_atomic(&dir.join("report.csv"), &output::report_csv(&outcome.report))?;
    if failed > 0 {
        return Err(CliError::Flights {
            failed,
            total: outcome.runs.len(),
            details: details.trim_end().to_string(),
        });
    }
    Ok(outcome)
}

/// Writes `bulletin.txt`, `stations.csv` and `aircraft.csv` for one seeded
/// synthetic world.
pub fn cmd_gen_synthetic(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let world = synthetic_world(&cfg.synthetic, cfg.experiment.base_seed)?;
    let dir = &cfg.output.dir;
    let valid = ValidTime {
        day: 1,
        hour: 12,
        minute: 0,
    };
    let start = chrono::DateTime::from_timestamp(1_704_110_400, 0).expect("fixed timestamp");
    let files = [
        (dir.join("bulletin.txt"), write_bulletin(&world.bulletin(valid))?),
        (dir.join("stations.csv"), write_station_directory(&world.directory())),
        (dir.join("aircraft.csv"), write_aircraft_csv(&world.aircraft_table(start))),
    ];
    for (p, text) in &files {
        write_atomic(p, text)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}
