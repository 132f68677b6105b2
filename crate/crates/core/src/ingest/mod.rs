//! Input formats: FB winds-aloft bulletins, a station directory, and aircraft
//! report tables.

mod aircraft;
mod directory;
pub mod fb;

use thiserror::Error;

pub use aircraft::{parse_aircraft_csv, read_aircraft_csv, write_aircraft_csv, AircraftReportTable, AircraftRow};
pub use directory::{parse_station_directory, read_station_directory, write_station_directory, StationDirectory};
pub use fb::{
    decode_fb_group, decode_fb_group_at, encode_fb_group, fb_to_station_observations, parse_bulletin, write_bulletin, FbGroup,
    GroupError, LevelObservations, ValidTime, WindsAloftBulletin,
};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("bulletin line {line}, column {column}: {message}")]
    Bulletin { line: usize, column: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Table { line: u64, column: String, message: String },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("level {level_ft} ft is not in the bulletin (levels: {available:?})")]
    LevelNotFound { level_ft: u32, available: Vec<u32> },
    #[error("duplicate station code {0:?}")]
    DuplicateStation(String),
    #[error("{0}")]
    Invalid(String),
}

impl IngestError {
    fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
