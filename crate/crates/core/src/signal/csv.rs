//! CSV readers for the three input kinds.
//!
//! Formats:
//! - traffic: `hour,count`, 24 rows, one per hour of the day;
//! - solar:   `event,time`, rows sunrise / solar_noon / sunset, HH:MM;
//! - measurements: `date,time,no_ugm3`, 30-minute cadence, blank value = missing.
//!
//! Every reader rejects unexpected headers outright.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;

use super::{SeriesKind, SolarEvents, TimeSeries};
use crate::error::SignalError;

fn parse_err(path: &Path, reason: impl Into<String>) -> SignalError {
    SignalError::Parse {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn open_reader(
    path: &Path,
    expected_headers: &[&str],
) -> Result<csv::Reader<std::fs::File>, SignalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => SignalError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => parse_err(path, e.to_string()),
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, e.to_string()))?
        .clone();
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_headers {
        return Err(parse_err(
            path,
            format!(
                "unexpected header `{}`; expected `{}`",
                got.join(","),
                expected_headers.join(",")
            ),
        ));
    }
    Ok(rdr)
}

/// Parse `HH:MM` into a fraction of the day.
fn parse_clock(path: &Path, s: &str) -> Result<f64, SignalError> {
    let (h, m) = s
        .split_once(':')
        .ok_or_else(|| parse_err(path, format!("invalid time `{s}`: expected HH:MM")))?;
    let hours: u32 = h
        .parse()
        .map_err(|_| parse_err(path, format!("invalid hour in `{s}`")))?;
    let minutes: u32 = m
        .parse()
        .map_err(|_| parse_err(path, format!("invalid minutes in `{s}`")))?;
    if hours > 23 || minutes > 59 {
        return Err(parse_err(path, format!("time `{s}` out of range")));
    }
    Ok((hours * 60 + minutes) as f64 / 1440.0)
}

/// Hourly traffic counts: exactly the 24 hours of one day.
pub fn read_traffic_csv(path: impl AsRef<Path>) -> Result<TimeSeries, SignalError> {
    let path = path.as_ref();
    let mut rdr = open_reader(path, &["hour", "count"])?;
    let mut by_hour: [Option<f64>; 24] = [None; 24];
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        let hour: usize = record[0]
            .parse()
            .map_err(|_| parse_err(path, format!("invalid hour `{}`", &record[0])))?;
        if hour > 23 {
            return Err(parse_err(path, format!("hour {hour} out of 0..=23")));
        }
        let count: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(path, format!("invalid count `{}`", &record[1])))?;
        if count < 0.0 {
            return Err(parse_err(path, format!("negative count at hour {hour}")));
        }
        if by_hour[hour].replace(count).is_some() {
            return Err(parse_err(path, format!("duplicate row for hour {hour}")));
        }
    }
    let mut samples = Vec::with_capacity(24);
    for (hour, slot) in by_hour.iter().enumerate() {
        match slot {
            Some(count) => samples.push((hour as f64 / 24.0, *count)),
            None => return Err(parse_err(path, format!("missing row for hour {hour}"))),
        }
    }
    TimeSeries::new(SeriesKind::Traffic, samples)
}

/// Sunrise, solar noon and sunset as local clock times.
pub fn read_solar_csv(path: impl AsRef<Path>) -> Result<SolarEvents, SignalError> {
    let path = path.as_ref();
    let mut rdr = open_reader(path, &["event", "time"])?;
    let mut sunrise = None;
    let mut noon = None;
    let mut sunset = None;
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        let t = parse_clock(path, &record[1])?;
        let slot = match &record[0] {
            "sunrise" => &mut sunrise,
            "solar_noon" => &mut noon,
            "sunset" => &mut sunset,
            other => {
                return Err(parse_err(
                    path,
                    format!("unknown event `{other}`; expected sunrise, solar_noon or sunset"),
                ))
            }
        };
        if slot.replace(t).is_some() {
            return Err(parse_err(path, format!("duplicate event `{}`", &record[0])));
        }
    }
    match (sunrise, noon, sunset) {
        (Some(r), Some(n), Some(s)) => SolarEvents::new(r, n, s),
        _ => Err(parse_err(
            path,
            "missing one of sunrise, solar_noon, sunset",
        )),
    }
}

/// Concentration measurements, one series per calendar day. Blank values
/// mark missing slots and are skipped.
pub fn read_measurements_csv(path: impl AsRef<Path>) -> Result<Vec<TimeSeries>, SignalError> {
    let path = path.as_ref();
    let mut rdr = open_reader(path, &["date", "time", "no_ugm3"])?;
    let mut by_date: BTreeMap<NaiveDate, Vec<(f64, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| parse_err(path, e.to_string()))?;
        let raw = &record[2];
        if raw.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| parse_err(path, format!("invalid date `{}`", &record[0])))?;
        let t = parse_clock(path, &record[1])?;
        let value: f64 = raw
            .parse()
            .map_err(|_| parse_err(path, format!("invalid concentration `{raw}`")))?;
        if value < 0.0 {
            return Err(parse_err(
                path,
                format!("negative concentration {value} on {date}"),
            ));
        }
        by_date.entry(date).or_default().push((t, value));
    }
    let mut out = Vec::with_capacity(by_date.len());
    for (date, mut samples) in by_date {
        samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in samples.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(parse_err(
                    path,
                    format!("duplicate slot at t={} on {date}", w[0].0),
                ));
            }
        }
        out.push(TimeSeries::new(SeriesKind::Concentration, samples)?.with_date(date));
    }
    Ok(out)
}
