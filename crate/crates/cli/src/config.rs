//! Run configuration: one TOML file with a section per module, plus
//! `section.key=value` overrides applied on top.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use windroute_core::geo::GeoPoint;
use windroute_core::planner::{LibraryConfig, PlannerConfig};
use windroute_core::sim::{
    builtin_routes, FlightSetup, GpSampleParams, Policy, Route, SimConfig, StationLatticeConfig, SyntheticConfig,
    TruthSource,
};
use windroute_core::windmodel::{LooMethod, ModelHyperparams, PosteriorVariance};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelHyperparams,
    pub planner: PlannerConfig,
    pub library: LibraryConfig,
    pub sim: SimConfig,
    pub experiment: ExperimentConfig,
    pub truth: TruthSource,
    pub stations: StationLatticeConfig,
    pub routes: Vec<RouteConfig>,
    pub data: DataConfig,
    pub output: OutputConfig,
    pub fuse: FuseConfig,
    pub loo: LooConfig,
    pub synthetic: SyntheticConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelHyperparams::default(),
            planner: PlannerConfig::default(),
            library: LibraryConfig::default(),
            sim: SimConfig::default(),
            experiment: ExperimentConfig::default(),
            truth: TruthSource::Calm,
            stations: StationLatticeConfig::default(),
            routes: Vec::new(),
            data: DataConfig::default(),
            output: OutputConfig::default(),
            fuse: FuseConfig::default(),
            loo: LooConfig::default(),
            synthetic: SyntheticConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub repetitions: usize,
    /// Seeds every repetition of `simulate` and the world of `gen-synthetic`.
    pub base_seed: u64,
    pub policies: Vec<Policy>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            repetitions: 20,
            base_seed: 1,
            policies: Policy::ALL.to_vec(),
        }
    }
}

/// A named route; endpoints are `[lat_deg, lon_deg]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    pub name: String,
    pub start: [f64; 2],
    pub goal: [f64; 2],
}

impl RouteConfig {
    pub fn to_route(&self) -> Result<Route, CliError> {
        let p = |[lat, lon]: [f64; 2]| {
            GeoPoint::new(lat, lon, 0.0).map_err(|e| CliError::config(format!("route {}: {e}", self.name)))
        };
        Ok(Route {
            name: self.name.clone(),
            start: p(self.start)?,
            goal: p(self.goal)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub bulletin: Option<PathBuf>,
    /// Station directory CSV (code, lat_deg, lon_deg).
    pub stations: Option<PathBuf>,
    pub aircraft: Option<PathBuf>,
    pub level_ft: u32,
    /// Aircraft reports within this many feet of the level are used.
    pub altitude_band_ft: f64,
    /// Keep "light and variable" stations as calm observations.
    pub include_calm: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            bulletin: None,
            stations: None,
            aircraft: None,
            level_ft: 39000,
            altitude_band_ft: 2000.0,
            include_calm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FuseMethod {
    Laplace,
    Gpr,
}

impl FuseMethod {
    pub fn label(&self) -> &'static str {
        match self {
            FuseMethod::Laplace => "laplace",
            FuseMethod::Gpr => "gpr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lat_min_deg: 25.0,
            lat_max_deg: 49.0,
            lon_min_deg: -125.0,
            lon_max_deg: -67.0,
            rows: 13,
            cols: 30,
        }
    }
}

impl GridSpec {
    /// Nodes row by row from the south-west corner; a single row or column
    /// sits at the minimum.
    pub fn nodes(&self, alt_ft: f64) -> Vec<GeoPoint> {
        let step = |lo: f64, hi: f64, n: usize| if n > 1 { (hi - lo) / (n - 1) as f64 } else { 0.0 };
        let dlat = step(self.lat_min_deg, self.lat_max_deg, self.rows);
        let dlon = step(self.lon_min_deg, self.lon_max_deg, self.cols);
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let lat = self.lat_min_deg + i as f64 * dlat;
                let lon = self.lon_min_deg + j as f64 * dlon;
                out.push(GeoPoint::new(lat, lon, alt_ft).expect("grid validated"));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuseConfig {
    pub method: FuseMethod,
    pub variance: PosteriorVariance,
    pub grid: GridSpec,
    /// Arrow length per knot of wind in the GeoJSON layer.
    pub arrow_nm_per_kt: f64,
}

impl Default for FuseConfig {
    fn default() -> Self {
        Self {
            method: FuseMethod::Laplace,
            variance: PosteriorVariance::EffectiveNoise,
            grid: GridSpec::default(),
            arrow_nm_per_kt: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LooConfig {
    pub methods: Vec<LooMethod>,
}

impl Default for LooConfig {
    fn default() -> Self {
        Self {
            methods: LooMethod::ALL.to_vec(),
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` of the form
    /// `section.key=value`, and resolves relative input paths against the
    /// config file's directory. The output directory stays relative to the
    /// working directory.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = match path {
            Some(p) => {
                // an unreadable config is reported as a config problem, not I/O
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let mut cfg: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::config(format!("{}{e}", path.map(|p| format!("{}: ", p.display())).unwrap_or_default())))?;
        if let Some(base) = path.and_then(Path::parent) {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.data.bulletin, &mut self.data.stations, &mut self.data.aircraft].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn setup(&self) -> FlightSetup {
        FlightSetup {
            sim: self.sim,
            planner: self.planner,
            library: self.library,
            model: self.model,
        }
    }

    /// The configured routes, or the two built-in ones when none are given.
    pub fn routes(&self) -> Result<Vec<Route>, CliError> {
        if self.routes.is_empty() {
            return Ok(builtin_routes());
        }
        self.routes.iter().map(RouteConfig::to_route).collect()
    }

    /// Range checks shared by every command.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |section: &str, e: &dyn std::fmt::Display| CliError::config(format!("[{section}] {e}"));
        self.model.validate().map_err(|e| bad("model", &e))?;
        self.planner.validate().map_err(|e| bad("planner", &e))?;
        self.library.build().map_err(|e| bad("library", &e))?;
        let s = &self.sim;
        if !(s.cruise_alt_ft.is_finite() && s.cruise_alt_ft >= 0.0 && s.direct_step_nm > 0.0 && s.time_cap_factor >= 1.0) {
            return Err(bad("sim", &"cruise_alt_ft must be >= 0, direct_step_nm > 0 and time_cap_factor >= 1"));
        }
        let e = &self.experiment;
        if e.repetitions == 0 {
            return Err(bad("experiment", &"repetitions must be at least 1"));
        }
        if e.policies.is_empty() {
            return Err(bad("experiment", &"policies must not be empty"));
        }
        for (i, p) in e.policies.iter().enumerate() {
            if e.policies[..i].contains(p) {
                return Err(bad("experiment", &format!("policy {p} listed twice")));
            }
        }
        validate_truth(&self.truth).map_err(|m| bad("truth", &m))?;
        let st = &self.stations;
        if !(st.spacing_nm > 0.0 && st.margin_nm >= 0.0 && st.forecast_noise_sd_kt >= 0.0) {
            return Err(bad("stations", &"spacing_nm must be > 0, margin_nm and forecast_noise_sd_kt >= 0"));
        }
        let mut names: Vec<&str> = Vec::new();
        for r in &self.routes {
            let route = r.to_route()?;
            if route.distance_nm() <= self.planner.goal_radius_nm {
                return Err(bad("routes", &format!("route {} is shorter than the goal radius", r.name)));
            }
            if names.contains(&r.name.as_str()) || r.name.is_empty() || r.name.contains(['/', '\\']) {
                return Err(bad("routes", &format!("route name {:?} is empty, duplicated or contains a path separator", r.name)));
            }
            names.push(&r.name);
        }
        if !(self.data.altitude_band_ft >= 0.0) {
            return Err(bad("data", &"altitude_band_ft must be >= 0"));
        }
        let g = &self.fuse.grid;
        if g.rows == 0 || g.cols == 0 || !(g.lat_min_deg <= g.lat_max_deg && g.lon_min_deg <= g.lon_max_deg) {
            return Err(bad("fuse.grid", &"need rows, cols >= 1 and min <= max"));
        }
        if GeoPoint::new(g.lat_min_deg, g.lon_min_deg, 0.0).is_err() || GeoPoint::new(g.lat_max_deg, g.lon_max_deg, 0.0).is_err() {
            return Err(bad("fuse.grid", &"corners must be valid coordinates"));
        }
        if !(self.fuse.arrow_nm_per_kt > 0.0) {
            return Err(bad("fuse", &"arrow_nm_per_kt must be positive"));
        }
        if self.loo.methods.is_empty() {
            return Err(bad("loo", &"methods must not be empty"));
        }
        self.synthetic.validate().map_err(|e| bad("synthetic", &e))?;
        Ok(())
    }

    /// Input file named by `key`, which must exist.
    pub fn require_file(&self, key: &str, path: &Option<PathBuf>) -> Result<PathBuf, CliError> {
        let p = path.as_ref().ok_or_else(|| CliError::config(format!("[data] {key} is not set")))?;
        if !p.is_file() {
            return Err(CliError::config(format!("[data] {key}: {} does not exist", p.display())));
        }
        Ok(p.clone())
    }
}

fn validate_gp(p: &GpSampleParams) -> Result<(), String> {
    if !(p.sd_kt >= 0.0 && p.lengthscale_h_nm > 0.0 && p.lengthscale_v_ft > 0.0 && p.features >= 1) {
        return Err("gp sample needs sd_kt >= 0, positive lengthscales and features >= 1".into());
    }
    if !(p.mean_u_kt.is_finite() && p.mean_v_kt.is_finite()) {
        return Err("gp sample mean must be finite".into());
    }
    Ok(())
}

fn validate_truth(t: &TruthSource) -> Result<(), String> {
    match t {
        TruthSource::Calm | TruthSource::Snapshots { .. } => Ok(()),
        TruthSource::Uniform { u_kt, v_kt } => {
            (u_kt.is_finite() && v_kt.is_finite()).then_some(()).ok_or_else(|| "wind must be finite".into())
        }
        TruthSource::RouteRelative {
            headwind_kt,
            crosswind_kt,
        } => (headwind_kt.is_finite() && crosswind_kt.is_finite())
            .then_some(())
            .ok_or_else(|| "wind must be finite".into()),
        TruthSource::HeadwindJet {
            core_speed_kt,
            half_width_nm,
            background,
        } => {
            if !(*core_speed_kt >= 0.0 && *half_width_nm > 0.0) {
                return Err("jet needs core_speed_kt >= 0 and half_width_nm > 0".into());
            }
            background.as_ref().map_or(Ok(()), validate_gp)
        }
        TruthSource::GpSample(p) => validate_gp(p),
    }
}

/// `a.b.c=value`; the value is read as a TOML literal, falling back to a
/// bare string.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {spec:?} is not key=value")))?;
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("override key {key:?} is malformed")));
    }
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(format!("override {key:?}: {part} is not a section")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
