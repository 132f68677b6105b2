//! Winds-aloft (FB) forecast bulletins: group codec, bulletin parser and writer.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{IngestError, StationDirectory};
use crate::windmodel::{StationObservation, WindVector};

/// Levels above this altitude print temperatures without a sign; they are
/// always negative.
pub const IMPLIED_NEGATIVE_TEMP_FT: u32 = 24000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FbGroup {
    Wind {
        /// Direction the wind blows from, a multiple of 10 in [0, 360).
        direction_from_deg: u16,
        speed_kt: u16,
        temp_c: Option<i8>,
    },
    /// The "light and variable" sentinel `9900`.
    Calm { temp_c: Option<i8> },
    Missing,
}

impl FbGroup {
    /// Wind vector under the direction-from convention; calm is zero.
    pub fn wind(&self) -> Option<WindVector> {
        match *self {
            FbGroup::Wind {
                direction_from_deg,
                speed_kt,
                ..
            } => Some(WindVector::from_direction_speed(direction_from_deg as f64, speed_kt as f64)),
            FbGroup::Calm { .. } => Some(WindVector::CALM),
            FbGroup::Missing => None,
        }
    }

    /// Rounds a wind to the nearest printable group: direction to 10 degrees,
    /// speed to 1 kt capped at 199, and under 5 kt to the calm sentinel.
    pub fn from_wind(wind: WindVector, temp_c: Option<i8>) -> Self {
        let speed = wind.speed().round();
        if speed < 5.0 {
            return FbGroup::Calm { temp_c };
        }
        // course the air moves toward, reversed to the direction it comes from
        let from = (wind.course_deg() + 180.0).rem_euclid(360.0);
        FbGroup::Wind {
            direction_from_deg: ((from / 10.0).round() as u16 % 36) * 10,
            speed_kt: speed.min(199.0) as u16,
            temp_c,
        }
    }

    pub fn temp_c(&self) -> Option<i8> {
        match *self {
            FbGroup::Wind { temp_c, .. } | FbGroup::Calm { temp_c } => temp_c,
            FbGroup::Missing => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("byte {offset}: {message}")]
pub struct GroupError {
    pub offset: usize,
    pub message: String,
}

fn group_err(offset: usize, message: impl Into<String>) -> GroupError {
    GroupError {
        offset,
        message: message.into(),
    }
}

fn two_digits(b: &[u8], at: usize) -> Result<u8, GroupError> {
    let d = |i: usize| -> Result<u8, GroupError> {
        match b.get(i) {
            Some(c) if c.is_ascii_digit() => Ok(c - b'0'),
            Some(c) => Err(group_err(i, format!("expected a digit, found {:?}", *c as char))),
            None => Err(group_err(i, "group ends early")),
        }
    };
    Ok(d(at)? * 10 + d(at + 1)?)
}

/// Decodes one `ddff[+-tt]` group. Six-character groups (`ddfftt`) carry an
/// implied negative temperature; use [`decode_fb_group_at`] to check they
/// only appear at the levels where that convention applies.
pub fn decode_fb_group(text: &str) -> Result<FbGroup, GroupError> {
    let b = text.trim().as_bytes();
    let lead = text.len() - text.trim_start().len();
    decode_bytes(b).map_err(|e| GroupError {
        offset: e.offset + lead,
        ..e
    })
}

/// As [`decode_fb_group`], knowing the altitude the group was printed for.
pub fn decode_fb_group_at(text: &str, level_ft: u32) -> Result<FbGroup, GroupError> {
    if text.trim().len() == 6 && level_ft < IMPLIED_NEGATIVE_TEMP_FT {
        return Err(group_err(
            4,
            format!("unsigned temperature is only used at or above {IMPLIED_NEGATIVE_TEMP_FT} ft"),
        ));
    }
    decode_fb_group(text)
}

fn decode_bytes(b: &[u8]) -> Result<FbGroup, GroupError> {
    if b.is_empty() {
        return Ok(FbGroup::Missing);
    }
    if !matches!(b.len(), 4 | 6 | 7) {
        return Err(group_err(0, format!("group must be 4, 6 or 7 characters, got {}", b.len())));
    }
    let dd = two_digits(b, 0)?;
    let ff = two_digits(b, 2)?;
    let temp_c = match b.len() {
        4 => None,
        6 => Some(-(two_digits(b, 4)? as i8)),
        _ => {
            let t = two_digits(b, 5)? as i8;
            match b[4] {
                b'+' => Some(t),
                b'-' => Some(-t),
                c => return Err(group_err(4, format!("expected '+' or '-', found {:?}", c as char))),
            }
        }
    };
    match (dd, ff) {
        (99, 0) => Ok(FbGroup::Calm { temp_c }),
        (0..=36, _) => Ok(FbGroup::Wind {
            direction_from_deg: (dd as u16 * 10) % 360,
            speed_kt: ff as u16,
            temp_c,
        }),
        (51..=86, _) => Ok(FbGroup::Wind {
            direction_from_deg: ((dd as u16 - 50) * 10) % 360,
            speed_kt: ff as u16 + 100,
            temp_c,
        }),
        _ => Err(group_err(0, format!("direction code {dd:02} is not a valid FB direction"))),
    }
}

/// Encodes a group for printing at `level_ft`. North is written as `36`.
pub fn encode_fb_group(group: &FbGroup, level_ft: u32) -> Result<String, GroupError> {
    let (core, temp_c) = match *group {
        FbGroup::Missing => return Ok(String::new()),
        FbGroup::Calm { temp_c } => ("9900".to_string(), temp_c),
        FbGroup::Wind {
            direction_from_deg,
            speed_kt,
            temp_c,
        } => {
            if direction_from_deg % 10 != 0 || direction_from_deg >= 360 {
                return Err(group_err(0, format!("direction {direction_from_deg} is not a multiple of 10 in [0, 360)")));
            }
            if speed_kt > 199 {
                return Err(group_err(2, format!("speed {speed_kt} kt exceeds 199")));
            }
            let dir = if direction_from_deg == 0 { 36 } else { direction_from_deg / 10 };
            let (dd, ff) = if speed_kt >= 100 { (dir + 50, speed_kt - 100) } else { (dir, speed_kt) };
            (format!("{dd:02}{ff:02}"), temp_c)
        }
    };
    Ok(match temp_c {
        None => core,
        Some(t) if t.unsigned_abs() > 99 => return Err(group_err(4, format!("temperature {t} out of range"))),
        Some(t) if level_ft > IMPLIED_NEGATIVE_TEMP_FT && t <= 0 => format!("{core}{:02}", -t),
        Some(t) if level_ft > IMPLIED_NEGATIVE_TEMP_FT => {
            return Err(group_err(4, format!("positive temperature {t} cannot be printed above {IMPLIED_NEGATIVE_TEMP_FT} ft")))
        }
        Some(t) if t < 0 => format!("{core}-{:02}", -t),
        Some(t) => format!("{core}+{t:02}"),
    })
}

/// Issue/valid stamp in the bulletin's day-of-month + UTC time form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidTime {
    pub day: u8,
    pub hour: u8,
    pub minute: u8,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WindsAloftBulletin {
    pub valid_time: Option<ValidTime>,
    pub levels_ft: Vec<u32>,
    /// Station code to one group per level.
    pub entries: BTreeMap<String, Vec<FbGroup>>,
}

impl WindsAloftBulletin {
    pub fn level_index(&self, level_ft: u32) -> Option<usize> {
        self.levels_ft.iter().position(|&l| l == level_ft)
    }

    pub fn group(&self, station: &str, level_ft: u32) -> Option<&FbGroup> {
        let i = self.level_index(level_ft)?;
        self.entries.get(station).and_then(|g| g.get(i))
    }
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> IngestError {
    IngestError::Bulletin {
        line,
        column,
        message: message.into(),
    }
}

/// Byte ranges of whitespace-separated tokens.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

fn parse_valid_time(tok: &str) -> Option<ValidTime> {
    let b = tok.as_bytes();
    if b.len() != 7 || b[6] != b'Z' || !b[..6].iter().all(u8::is_ascii_digit) {
        return None;
    }
    let n = |i: usize| (b[i] - b'0') * 10 + (b[i + 1] - b'0');
    let t = ValidTime {
        day: n(0),
        hour: n(2),
        minute: n(4),
    };
    ((1..=31).contains(&t.day) && t.hour < 24 && t.minute < 60).then_some(t)
}

/// Parses an FB bulletin. Lines before the `FT` header are free text except
/// for an optional `VALID ddhhmmZ` stamp. Each station line holds a code and
/// groups aligned under the level labels; groups for levels below the
/// station elevation are left blank.
pub fn parse_bulletin(text: &str) -> Result<WindsAloftBulletin, IngestError> {
    let mut bulletin = WindsAloftBulletin::default();
    let mut label_ends: Vec<usize> = Vec::new();
    let mut in_table = false;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(bad) = line.char_indices().find(|(_, c)| !c.is_ascii()) {
            return Err(parse_err(line_no, bad.0 + 1, "non-ASCII character"));
        }
        let toks = tokens(line);
        if toks.is_empty() {
            continue;
        }
        if !in_table {
            if toks[0].1 == "FT" {
                for &(col, t) in &toks[1..] {
                    let level: u32 = t
                        .parse()
                        .map_err(|_| parse_err(line_no, col + 1, format!("level {t:?} is not a number")))?;
                    if bulletin.levels_ft.last().is_some_and(|&prev| level <= prev) {
                        return Err(parse_err(line_no, col + 1, "levels must be strictly increasing"));
                    }
                    bulletin.levels_ft.push(level);
                    label_ends.push(col + t.len());
                }
                if bulletin.levels_ft.is_empty() {
                    return Err(parse_err(line_no, 1, "FT line lists no levels"));
                }
                in_table = true;
            } else if let Some(i) = toks.iter().position(|t| t.1 == "VALID") {
                if let Some(&(col, t)) = toks.get(i + 1) {
                    bulletin.valid_time =
                        Some(parse_valid_time(t).ok_or_else(|| parse_err(line_no, col + 1, format!("bad valid time {t:?}")))?);
                }
            }
            continue;
        }

        let (code_col, code) = toks[0];
        if !code.bytes().all(|c| c.is_ascii_alphanumeric()) {
            return Err(parse_err(line_no, code_col + 1, format!("bad station code {code:?}")));
        }
        if bulletin.entries.contains_key(code) {
            return Err(parse_err(line_no, code_col + 1, format!("station {code} listed twice")));
        }
        let groups = &toks[1..];
        if groups.len() > label_ends.len() {
            return Err(parse_err(line_no, groups[label_ends.len()].0 + 1, "more groups than levels"));
        }
        let slots = assign_columns(groups, &label_ends);
        let mut row = vec![FbGroup::Missing; label_ends.len()];
        for (&(col, g), slot) in groups.iter().zip(slots) {
            row[slot] = decode_fb_group_at(g, bulletin.levels_ft[slot])
                .map_err(|e| parse_err(line_no, col + e.offset + 1, e.message))?;
        }
        bulletin.entries.insert(code.to_string(), row);
    }
    if !in_table {
        return Err(parse_err(text.lines().count().max(1), 1, "no FT header line"));
    }
    Ok(bulletin)
}

/// Level slot of each group. A full row is positional; a short row matches
/// groups to the nearest label end column, falling back to right alignment
/// (blank groups are the low levels) when that is not strictly increasing.
fn assign_columns(groups: &[(usize, &str)], label_ends: &[usize]) -> Vec<usize> {
    let n = label_ends.len();
    if groups.len() == n {
        return (0..n).collect();
    }
    let nearest: Vec<usize> = groups
        .iter()
        .map(|&(col, g)| {
            let end = col + g.len();
            (0..n).min_by_key(|&i| label_ends[i].abs_diff(end)).unwrap_or(0)
        })
        .collect();
    if nearest.windows(2).all(|w| w[0] < w[1]) {
        nearest
    } else {
        (n - groups.len()..n).collect()
    }
}

/// Prints a bulletin in the column-aligned layout [`parse_bulletin`] reads.
pub fn write_bulletin(bulletin: &WindsAloftBulletin) -> Result<String, IngestError> {
    const WIDTH: usize = 8;
    let mut out = String::new();
    if let Some(t) = bulletin.valid_time {
        let _ = writeln!(out, "VALID {:02}{:02}{:02}Z", t.day, t.hour, t.minute);
    }
    let _ = writeln!(out, "TEMPS NEG ABV {IMPLIED_NEGATIVE_TEMP_FT}");
    out.push('\n');
    out.push_str("FT  ");
    for level in &bulletin.levels_ft {
        let _ = write!(out, "{level:>WIDTH$}");
    }
    out.push('\n');
    for (code, groups) in &bulletin.entries {
        if groups.len() != bulletin.levels_ft.len() {
            return Err(IngestError::Invalid(format!("station {code} has {} groups for {} levels", groups.len(), bulletin.levels_ft.len())));
        }
        let mut line = format!("{code:<4}");
        for (g, &level) in groups.iter().zip(&bulletin.levels_ft) {
            let s = encode_fb_group(g, level).map_err(|e| IngestError::Invalid(format!("station {code} at {level} ft: {e}")))?;
            let _ = write!(line, "{s:>WIDTH$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    Ok(out)
}

/// Stations decoded at one level.
#[derive(Debug, Clone, Default)]
pub struct LevelObservations {
    pub observations: Vec<StationObservation>,
    /// Station code of each observation.
    pub codes: Vec<String>,
    /// Codes whose entry was the calm sentinel (kept or dropped per `include_calm`).
    pub calm: Vec<String>,
    pub warnings: Vec<String>,
}

/// Converts the entries at `level_ft` to wind observations at that altitude.
/// Missing entries are skipped; stations absent from the directory produce a
/// warning rather than an error.
pub fn fb_to_station_observations(
    bulletin: &WindsAloftBulletin,
    directory: &StationDirectory,
    level_ft: u32,
    include_calm: bool,
) -> Result<LevelObservations, IngestError> {
    let idx = bulletin.level_index(level_ft).ok_or(IngestError::LevelNotFound {
        level_ft,
        available: bulletin.levels_ft.clone(),
    })?;
    let mut out = LevelObservations::default();
    for (code, groups) in &bulletin.entries {
        let g = groups[idx];
        let Some(wind) = g.wind() else { continue };
        let Some(site) = directory.get(code) else {
            out.warnings.push(format!("station {code} is not in the directory; skipped"));
            continue;
        };
        if matches!(g, FbGroup::Calm { .. }) {
            out.calm.push(code.clone());
            if !include_calm {
                continue;
            }
        }
        out.observations.push(StationObservation::new(site.with_alt(level_ft as f64), wind));
        out.codes.push(code.clone());
    }
    Ok(out)
}
