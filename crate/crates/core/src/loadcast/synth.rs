//! Synthetic hourly load/temperature series with a known regression truth.
//!
//! The load is a sum of a linear trend, a daily profile, a weekend drop that
//! deepens in daytime, a mild monthly cycle, a quadratic temperature response
//! and an afternoon temperature interaction, plus Gaussian noise. Every term
//! lies in the span of the calendar/temperature features, so a clean fit
//! recovers it up to the noise.

use std::f64::consts::{PI, TAU};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};

use super::{LoadRecord, LoadTable};
use crate::random::{seeded_rng, Gaussian};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLoadSpec {
    pub start: NaiveDateTime,
    pub years: u32,
    pub seed: u64,
    /// Standard deviation of the additive load noise, MW.
    pub noise_sd: f64,
}

impl SyntheticLoadSpec {
    /// Starts 2013-01-01 00:00 with 25 MW noise.
    pub fn years(years: u32, seed: u64) -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2013, 1, 1)
                .expect("valid date")
                .and_hms_opt(0, 0, 0)
                .expect("valid time"),
            years,
            seed,
            noise_sd: 25.0,
        }
    }
}

/// Noise-free load for a timestamp, temperature and hours since start.
fn truth(ts: &NaiveDateTime, temperature: f64, hours: f64) -> f64 {
    let h = ts.hour() as f64;
    let weekend = ts.weekday().num_days_from_monday() >= 5;
    let daytime = (8..=20).contains(&ts.hour());
    let afternoon = (12..=18).contains(&ts.hour());
    let dt = temperature - 17.0;
    1000.0 + 30.0 * hours / 8766.0 - 120.0 * (TAU * (h - 4.0) / 24.0).cos()
        + if weekend { -80.0 } else { 0.0 }
        + if weekend && daytime { -40.0 } else { 0.0 }
        + 20.0 * (TAU * ts.month0() as f64 / 12.0).cos()
        + 2.5 * dt * dt
        + if afternoon { 0.5 * dt * dt } else { 0.0 }
}

pub fn synthetic_table(spec: &SyntheticLoadSpec) -> LoadTable {
    let end = spec
        .start
        .with_year(spec.start.year() + spec.years as i32)
        .expect("valid end date");
    let mut rng = seeded_rng(spec.seed);
    let mut g = Gaussian::new();
    let mut weather = 0.0;
    let mut records = Vec::new();
    let mut ts = spec.start;
    let mut k = 0usize;
    while ts < end {
        let doy = ts.ordinal0() as f64;
        weather = 0.95 * weather + 0.5 * g.sample(&mut rng);
        let temperature = 12.0 - 12.0 * (TAU * (doy - 15.0) / 365.25).cos()
            + 4.0 * (PI * (ts.hour() as f64 - 9.0) / 12.0).sin()
            + weather;
        let load = truth(&ts, temperature, k as f64) + spec.noise_sd * g.sample(&mut rng);
        records.push(LoadRecord {
            timestamp: ts,
            load,
            temperature,
        });
        ts += Duration::hours(1);
        k += 1;
    }
    LoadTable::new(records).expect("synthetic series is ordered and positive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_year_is_8760_ordered_hours() {
        let t = synthetic_table(&SyntheticLoadSpec::years(1, 1));
        assert_eq!(t.len(), 8760);
        assert_eq!(t.gaps(), 0);
        assert!(t.records().iter().all(|r| r.load > 500.0));
    }

    #[test]
    fn leap_year_adds_a_day() {
        let mut spec = SyntheticLoadSpec::years(1, 1);
        spec.start = NaiveDate::from_ymd_opt(2016, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        assert_eq!(synthetic_table(&spec).len(), 8784);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synthetic_table(&SyntheticLoadSpec::years(1, 9));
        let b = synthetic_table(&SyntheticLoadSpec::years(1, 9));
        assert_eq!(a, b);
    }
}
