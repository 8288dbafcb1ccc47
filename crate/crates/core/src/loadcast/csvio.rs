use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDateTime;
use serde::Deserialize;

use super::{LoadError, LoadRecord, LoadTable};
use crate::error::Result;

/// Format used when writing; reading also accepts a space separator and
/// omitted seconds.
pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

const ACCEPTED_FORMATS: [&str; 4] = [
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

#[derive(Deserialize)]
struct RawRow {
    timestamp: String,
    load: String,
    temperature: String,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    ACCEPTED_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

/// Reads `timestamp,load,temperature` CSV. Row numbers in errors count data
/// rows from 1.
pub fn read_csv<R: Read>(reader: R) -> Result<LoadTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    for col in ["timestamp", "load", "temperature"] {
        if !headers.iter().any(|h| h == col) {
            return Err(LoadError::MissingColumn(col.to_string()).into());
        }
    }
    let mut records = Vec::new();
    for (i, row) in rdr.deserialize::<RawRow>().enumerate() {
        let row_no = i + 1;
        let parse_err = |message: String| LoadError::Parse { row: row_no, message };
        let raw = row.map_err(|e| parse_err(e.to_string()))?;
        let timestamp = parse_timestamp(&raw.timestamp)
            .ok_or_else(|| parse_err(format!("bad timestamp {:?}", raw.timestamp)))?;
        let load: f64 = raw
            .load
            .parse()
            .map_err(|_| parse_err(format!("bad load {:?}", raw.load)))?;
        let temperature: f64 = raw
            .temperature
            .parse()
            .map_err(|_| parse_err(format!("bad temperature {:?}", raw.temperature)))?;
        records.push(LoadRecord {
            timestamp,
            load,
            temperature,
        });
    }
    Ok(LoadTable::new(records)?)
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<LoadTable> {
    read_csv(std::fs::File::open(path)?)
}

pub fn write_csv<W: Write>(table: &LoadTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "load", "temperature"])?;
    for r in table.records() {
        w.write_record([
            r.timestamp.format(TIMESTAMP_FORMAT).to_string(),
            r.load.to_string(),
            r.temperature.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
