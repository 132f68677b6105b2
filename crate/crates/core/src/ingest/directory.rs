use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use super::IngestError;
use crate::geo::GeoPoint;

/// Station code to surface location. FB bulletins carry no coordinates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StationDirectory {
    stations: BTreeMap<String, GeoPoint>,
}

impl StationDirectory {
    pub fn insert(&mut self, code: impl Into<String>, site: GeoPoint) -> Result<(), IngestError> {
        let code = code.into();
        if self.stations.contains_key(&code) {
            return Err(IngestError::DuplicateStation(code));
        }
        self.stations.insert(code, site);
        Ok(())
    }

    pub fn get(&self, code: &str) -> Option<&GeoPoint> {
        self.stations.get(code)
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &GeoPoint)> {
        self.stations.iter().map(|(k, v)| (k.as_str(), v))
    }
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

/// Reads `code,lat_deg,lon_deg` rows.
pub fn parse_station_directory(reader: impl Read) -> Result<StationDirectory, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let table_err = |line: u64, column: &str, message: String| IngestError::Table {
        line,
        column: column.to_string(),
        message,
    };
    let headers = rdr
        .headers()
        .map_err(|e| table_err(1, "", e.to_string()))?
        .clone();
    let (ci, lai, loi) = (column(&headers, "code")?, column(&headers, "lat_deg")?, column(&headers, "lon_deg")?);
    let mut dir = StationDirectory::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| table_err(e.position().map_or(0, |p| p.line()), "", e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize, name: &str| -> Result<f64, IngestError> {
            let s = rec.get(i).unwrap_or("");
            s.parse().map_err(|_| table_err(line, name, format!("{s:?} is not a number")))
        };
        let code = rec.get(ci).unwrap_or("").to_string();
        if code.is_empty() {
            return Err(table_err(line, "code", "empty station code".into()));
        }
        let site = GeoPoint::new(num(lai, "lat_deg")?, num(loi, "lon_deg")?, 0.0)
            .map_err(|e| table_err(line, "lat_deg/lon_deg", e.to_string()))?;
        dir.insert(code, site).map_err(|e| table_err(line, "code", e.to_string()))?;
    }
    Ok(dir)
}

pub fn read_station_directory(path: &Path) -> Result<StationDirectory, IngestError> {
    let f = std::fs::File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_station_directory(f)
}

pub fn write_station_directory(dir: &StationDirectory) -> String {
    let mut out = String::from("code,lat_deg,lon_deg\n");
    for (code, p) in dir.iter() {
        out.push_str(&format!("{code},{},{}\n", p.lat_deg, p.lon_deg));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_writes() {
        let text = "code,lat_deg,lon_deg\nSEA,47.45,-122.31\nBOI, 43.57 ,-116.22\n";
        let dir = parse_station_directory(text.as_bytes()).unwrap();
        assert_eq!(dir.len(), 2);
        assert_eq!(dir.get("BOI").unwrap().lat_deg, 43.57);
        let again = parse_station_directory(write_station_directory(&dir).as_bytes()).unwrap();
        assert_eq!(again, dir);
    }

    #[test]
    fn rejects_duplicates_and_bad_rows() {
        let dup = "code,lat_deg,lon_deg\nSEA,47,-122\nSEA,46,-121\n";
        assert!(matches!(parse_station_directory(dup.as_bytes()), Err(IngestError::Table { line: 3, .. })));
        let bad = "code,lat_deg,lon_deg\nSEA,97,-122\n";
        assert!(parse_station_directory(bad.as_bytes()).is_err());
        assert!(matches!(
            parse_station_directory("code,lat\nSEA,1\n".as_bytes()),
            Err(IngestError::MissingColumn(_))
        ));
    }
}
