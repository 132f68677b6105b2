use windroute_core::geo::{great_circle_distance_nm, initial_bearing_deg, interpolate, project_nm, GeoPoint};
use windroute_core::planner::PlannerConfig;
use windroute_core::sim::{
    builtin_routes, run_experiment, simulate_flight, ExperimentSpec, FlightSetup, GpSampleParams, GroundTruthWindField,
    Policy, StationLatticeConfig, TruthSource,
};
use windroute_core::windmodel::{WindField, WindVector};

fn spec(truth: TruthSource, reps: usize, seed: u64) -> ExperimentSpec {
    ExperimentSpec {
        routes: vec![builtin_routes()[0].clone()],
        truth,
        policies: Policy::ALL.to_vec(),
        repetitions: reps,
        base_seed: seed,
        stations: StationLatticeConfig::default(),
        setup: FlightSetup::default(),
    }
}

// Independent great-circle time integral with 1 nm steps.
fn gcr_time_oracle(start: &GeoPoint, goal: &GeoPoint, wind: WindVector, airspeed: f64) -> f64 {
    let d = great_circle_distance_nm(start, goal);
    let n = d.ceil() as usize;
    let mut t = 0.0;
    for i in 0..n {
        let a = interpolate(start, goal, i as f64 / n as f64);
        let b = interpolate(start, goal, (i + 1) as f64 / n as f64);
        let course = initial_bearing_deg(&a, &b).unwrap().to_radians();
        let along = wind.u_kt * course.sin() + wind.v_kt * course.cos();
        let cross = wind.u_kt * course.cos() - wind.v_kt * course.sin();
        let gs = (airspeed * airspeed - cross * cross).sqrt() + along;
        t += great_circle_distance_nm(&a, &b) / gs * 3600.0;
    }
    t
}

#[test]
fn calm_world_every_policy_flies_at_airspeed_on_both_routes() {
    for route in builtin_routes() {
        let mut s = spec(TruthSource::Calm, 2, 3);
        s.routes = vec![route.clone()];
        let out = run_experiment(&s).unwrap();
        let expected = route.distance_nm() / 250.0 * 3600.0;
        for p in Policy::ALL {
            let row = out.report.row(&route.name, p).unwrap();
            assert_eq!(row.failures, 0);
            let rel = (row.mean_s - expected).abs() / expected;
            assert!(rel < 0.02, "{} {p}: {} vs {expected}", route.name, row.mean_s);
        }
    }
}

#[test]
fn uniform_wind_gcr_matches_time_integral() {
    let route = &builtin_routes()[0];
    for wind in [WindVector::new(-50.0, 0.0), WindVector::new(60.0, 10.0), WindVector::new(0.0, 80.0)] {
        let truth = GroundTruthWindField::Uniform(wind);
        let log = simulate_flight(Policy::Gcr, &route.start, &route.goal, &truth, &[], &FlightSetup::default(), 0).unwrap();
        let expected = gcr_time_oracle(&route.start, &route.goal, wind, 250.0);
        let rel = (log.total_time_s - expected).abs() / expected;
        assert!(rel < 1e-3, "{wind:?}: {} vs {expected}", log.total_time_s);
    }
}

#[test]
fn tailwind_is_faster_and_headwind_slower_than_calm() {
    let route = &builtin_routes()[0];
    let setup = FlightSetup::default();
    let fly = |w: WindVector| {
        simulate_flight(Policy::Gcr, &route.start, &route.goal, &GroundTruthWindField::Uniform(w), &[], &setup, 0)
            .unwrap()
            .total_time_s
    };
    let calm = fly(WindVector::CALM);
    // the route runs roughly west, so a wind toward the west is a tailwind
    assert!(fly(WindVector::new(-50.0, 0.0)) < calm);
    assert!(fly(WindVector::new(50.0, 0.0)) > calm);
}

#[test]
fn leg_kinematics_are_consistent() {
    let route = &builtin_routes()[0];
    let s = spec(TruthSource::GpSample(GpSampleParams::default()), 2, 11);
    let out = run_experiment(&s).unwrap();
    for run in &out.runs {
        let log = run.result.as_ref().unwrap();
        let mut dist = 0.0;
        for w in log.waypoints.windows(2) {
            let leg = w[1].leg.unwrap();
            let dt_h = (w[1].elapsed_s - w[0].elapsed_s) / 3600.0;
            let geo_len = great_circle_distance_nm(&w[0].point, &w[1].point);
            assert!((geo_len - leg.length_nm).abs() < 1e-6 * leg.length_nm.max(1.0));
            assert!((leg.length_nm / dt_h - leg.ground_speed_kt).abs() < 1e-6 * leg.ground_speed_kt);
            assert!(leg.ground_speed_kt > 0.0);
            dist += leg.length_nm;
        }
        assert!((dist - log.distance_flown_nm).abs() < 1e-6 * dist);
        assert!(log.distance_flown_nm >= route.distance_nm() - 1e-6);
        let last = log.waypoints.last().unwrap();
        assert!(great_circle_distance_nm(&last.point, &route.goal.with_alt(39000.0)) < 1e-6);
        assert_eq!(last.elapsed_s, log.total_time_s);
    }
}

#[test]
fn mean_policy_equals_ucb_with_zero_beta() {
    let route = &builtin_routes()[0];
    for seed in 0..5 {
        let s = spec(TruthSource::GpSample(GpSampleParams::default()), 1, seed);
        let world = s.world(route, 0).unwrap();
        let mut zero = FlightSetup::default();
        zero.planner.beta_t_override = Some(0.0);
        let mean = simulate_flight(Policy::Mean, &route.start, &route.goal, &world.truth, &world.stations, &s.setup, world.flight_seed).unwrap();
        let ucb0 = simulate_flight(Policy::Ucb, &route.start, &route.goal, &world.truth, &world.stations, &zero, world.flight_seed).unwrap();
        assert!(mean.same_flight(&ucb0), "seed {seed}");
    }
}

#[test]
fn experiments_are_deterministic() {
    let s = spec(TruthSource::GpSample(GpSampleParams::default()), 4, 21);
    let a = run_experiment(&s).unwrap();
    let b = run_experiment(&s).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.runs, b.runs);
}

#[test]
fn gcr_ignores_planner_and_library_settings() {
    let route = &builtin_routes()[0];
    let s = spec(TruthSource::GpSample(GpSampleParams::default()), 1, 5);
    let world = s.world(route, 0).unwrap();
    let base = simulate_flight(Policy::Gcr, &route.start, &route.goal, &world.truth, &world.stations, &s.setup, 1).unwrap();
    let mut other = FlightSetup::default();
    other.planner = PlannerConfig {
        ucb_delta: 0.5,
        replan_segment_count: 5,
        ..PlannerConfig::default()
    };
    other.library.count = 7;
    let alt = simulate_flight(Policy::Gcr, &route.start, &route.goal, &world.truth, &world.stations, &other, 99).unwrap();
    assert!(base.same_flight(&alt));
    assert!(base.observations.is_empty());
}

#[test]
fn single_repetition_has_zero_sd() {
    let out = run_experiment(&spec(TruthSource::GpSample(GpSampleParams::default()), 1, 8)).unwrap();
    for row in &out.report.rows {
        assert_eq!(row.n, 1);
        assert_eq!(row.sd_s, 0.0);
    }
}

#[test]
fn repetition_seeds_are_distinct_and_stable() {
    let s = spec(TruthSource::Calm, 10, 42);
    let seeds: Vec<u64> = (0..10).map(|r| s.repetition_seed(r)).collect();
    let mut sorted = seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    assert_eq!(sorted.len(), 10);
    assert_eq!(seeds, (0..10).map(|r| s.repetition_seed(r)).collect::<Vec<_>>());
    assert_eq!(ExperimentSpec::slot_label(0), "d01s0");
    assert_eq!(ExperimentSpec::slot_label(7), "d02s3");
}

#[test]
fn planners_escape_a_headwind_jet() {
    let truth = TruthSource::HeadwindJet {
        core_speed_kt: 200.0,
        half_width_nm: 60.0,
        background: None,
    };
    let out = run_experiment(&spec(truth, 3, 2)).unwrap();
    let gcr = out.report.row("sc-ut", Policy::Gcr).unwrap().mean_s;
    for p in [Policy::Ucb, Policy::Mean] {
        let t = out.report.row("sc-ut", p).unwrap().mean_s;
        assert!(t < gcr, "{p} {t} vs gcr {gcr}");
    }
}

#[test]
fn truth_winds_are_clamped() {
    let route = &builtin_routes()[0];
    let jet = TruthSource::HeadwindJet {
        core_speed_kt: 400.0,
        half_width_nm: 100.0,
        background: None,
    };
    let truth = jet.realize(route, 0, 0).unwrap();
    let mid = interpolate(&route.start, &route.goal, 0.5).with_alt(39000.0);
    let w = truth.wind_at(&mid);
    assert!((w.speed() - 250.0).abs() < 1e-9, "{w:?}");
}

#[test]
fn too_short_route_is_rejected() {
    let a = GeoPoint::new(40.0, -100.0, 0.0).unwrap();
    let b = project_nm(&a, 90.0, 5.0);
    let truth = GroundTruthWindField::Uniform(WindVector::CALM);
    assert!(simulate_flight(Policy::Ucb, &a, &b, &truth, &[], &FlightSetup::default(), 0).is_err());
}
