use std::io::Read;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::IngestError;
use crate::geo::GeoPoint;
use crate::windmodel::{AircraftReport, WindVector};

pub const AIRCRAFT_COLUMNS: [&str; 8] =
    ["time_utc", "aircraft_id", "lat_deg", "lon_deg", "alt_ft", "gs_kt", "track_deg", "tas_kt"];

#[derive(Debug, Clone, PartialEq)]
pub struct AircraftRow {
    pub time_utc: DateTime<Utc>,
    pub report: AircraftReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AircraftReportTable {
    pub rows: Vec<AircraftRow>,
}

impl AircraftReportTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn reports(&self) -> Vec<AircraftReport> {
        self.rows.iter().map(|r| r.report.clone()).collect()
    }

    /// Reports within `band_ft` of `level_ft`.
    pub fn near_level(&self, level_ft: f64, band_ft: f64) -> Vec<AircraftReport> {
        self.rows
            .iter()
            .filter(|r| (r.report.site.alt_ft - level_ft).abs() <= band_ft)
            .map(|r| r.report.clone())
            .collect()
    }

    pub fn unique_aircraft(&self) -> usize {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.report.aircraft_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Reads the aircraft report table. Columns are matched by name, so their
/// order is free; every canonical column must be present. Row errors name
/// the file line and column.
pub fn parse_aircraft_csv(reader: impl Read) -> Result<AircraftReportTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let err = |line: u64, column: &str, message: String| IngestError::Table {
        line,
        column: column.to_string(),
        message,
    };
    let headers = rdr.headers().map_err(|e| err(1, "", e.to_string()))?.clone();
    let mut idx = [0usize; 8];
    for (slot, name) in idx.iter_mut().zip(AIRCRAFT_COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))?;
    }
    let mut table = AircraftReportTable::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), "", e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |k: usize| rec.get(idx[k]).unwrap_or("");
        let num = |k: usize| -> Result<f64, IngestError> {
            let s = field(k);
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(err(line, AIRCRAFT_COLUMNS[k], format!("{s:?} is not a finite number"))),
            }
        };
        let time_utc = DateTime::parse_from_rfc3339(field(0))
            .map_err(|e| err(line, "time_utc", format!("{:?}: {e}", field(0))))?
            .with_timezone(&Utc);
        let id = field(1);
        if id.is_empty() {
            return Err(err(line, "aircraft_id", "empty aircraft id".into()));
        }
        let site = GeoPoint::new(num(2)?, num(3)?, num(4)?).map_err(|e| err(line, "lat_deg/lon_deg/alt_ft", e.to_string()))?;
        let gs = num(5)?;
        let track = num(6)?;
        if !(0.0..=360.0).contains(&track) {
            return Err(err(line, "track_deg", format!("track {track} outside [0, 360]")));
        }
        let tas = num(7)?;
        let report = AircraftReport::new(id, site, WindVector::from_course_speed(track, gs), tas)
            .map_err(|e| err(line, "gs_kt/tas_kt", e.to_string()))?;
        table.rows.push(AircraftRow { time_utc, report });
    }
    Ok(table)
}

pub fn read_aircraft_csv(path: &Path) -> Result<AircraftReportTable, IngestError> {
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_aircraft_csv(f)
}

pub fn write_aircraft_csv(table: &AircraftReportTable) -> String {
    let mut out = AIRCRAFT_COLUMNS.join(",");
    out.push('\n');
    for row in &table.rows {
        let r = &row.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.time_utc.to_rfc3339_opts(SecondsFormat::Secs, true),
            r.aircraft_id,
            r.site.lat_deg,
            r.site.lon_deg,
            r.site.alt_ft,
            r.ground_speed_kt(),
            r.track_deg(),
            r.airspeed_kt
        ));
    }
    out
}
