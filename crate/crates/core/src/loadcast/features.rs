//! Calendar and temperature design matrix.
//!
//! Columns, in order: intercept, trend, hour (1–23), weekday (Tue–Sun),
//! month (Feb–Dec), hour×weekday, T, T², T³, Tᵏ×hour and Tᵏ×month for
//! k = 1..3. The first level of every categorical block is the dropped
//! reference, which leaves 285 columns. Trend (hours since the training
//! start) and temperature are min-max scaled with training bounds; powers
//! are taken after scaling.

use chrono::{Datelike, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use super::{LoadError, LoadTable};
use crate::error::Result;
use crate::linalg::Matrix;

pub const TAO_FEATURE_COUNT: usize = 285;

const HOURS: usize = 24;
const WEEKDAYS: usize = 7;
const MONTHS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    fn scale(&self, v: f64) -> f64 {
        (v - self.min) / (self.max - self.min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<String>,
    pub origin: NaiveDateTime,
    /// Bounds of hours-since-origin on the training split.
    pub trend: MinMax,
    pub temperature: MinMax,
}

struct Calendar {
    hour: usize,
    weekday: usize,
    month: usize,
}

fn calendar(ts: &NaiveDateTime) -> Calendar {
    Calendar {
        hour: ts.hour() as usize,
        weekday: ts.weekday().num_days_from_monday() as usize,
        month: ts.month0() as usize,
    }
}

fn column_names() -> Vec<String> {
    let mut c = vec!["intercept".to_string(), "trend".to_string()];
    c.extend((1..HOURS).map(|h| format!("hour_{h}")));
    c.extend((1..WEEKDAYS).map(|d| format!("weekday_{d}")));
    c.extend((1..MONTHS).map(|m| format!("month_{}", m + 1)));
    for h in 1..HOURS {
        c.extend((1..WEEKDAYS).map(|d| format!("hour_{h}:weekday_{d}")));
    }
    let powers = ["T", "T^2", "T^3"];
    c.extend(powers.iter().map(|p| p.to_string()));
    for p in powers {
        c.extend((1..HOURS).map(|h| format!("{p}:hour_{h}")));
    }
    for p in powers {
        c.extend((1..MONTHS).map(|m| format!("{p}:month_{}", m + 1)));
    }
    c
}

impl FeatureSchema {
    /// Fits the scaling bounds on `train` and checks that every calendar
    /// level, including every hour×weekday cell, is observed.
    pub fn fit(train: &LoadTable) -> Result<Self> {
        let recs = train.records();
        let first = recs.first().ok_or(LoadError::Empty)?;
        let origin = first.timestamp;
        let mut hours = [false; HOURS];
        let mut days = [false; WEEKDAYS];
        let mut months = [false; MONTHS];
        let mut cells = [[false; WEEKDAYS]; HOURS];
        let mut t = MinMax {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        for r in recs {
            let c = calendar(&r.timestamp);
            hours[c.hour] = true;
            days[c.weekday] = true;
            months[c.month] = true;
            cells[c.hour][c.weekday] = true;
            t.min = t.min.min(r.temperature);
            t.max = t.max.max(r.temperature);
        }
        let missing = |block: &'static str, seen: &[bool]| {
            seen.iter()
                .position(|&s| !s)
                .map(|level| LoadError::InsufficientCoverage { block, level })
        };
        if let Some(e) = missing("hour", &hours)
            .or_else(|| missing("weekday", &days))
            .or_else(|| missing("month", &months))
        {
            return Err(e.into());
        }
        for (h, row) in cells.iter().enumerate() {
            if let Some(d) = row.iter().position(|&s| !s) {
                return Err(LoadError::InsufficientCoverage {
                    block: "hour x weekday",
                    level: h * WEEKDAYS + d,
                }
                .into());
            }
        }
        if t.max <= t.min {
            return Err(LoadError::DegenerateInput(
                "temperature is constant, so its powers are collinear".into(),
            )
            .into());
        }
        let span = (recs[recs.len() - 1].timestamp - origin).num_hours() as f64;
        if span <= 0.0 {
            return Err(LoadError::DegenerateInput("training span is a single hour".into()).into());
        }
        Ok(Self {
            columns: column_names(),
            origin,
            trend: MinMax { min: 0.0, max: span },
            temperature: t,
        })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Design matrix for any split, using this schema's bounds.
    pub fn design(&self, table: &LoadTable) -> Result<Matrix> {
        let n = self.columns.len();
        let mut data = Vec::with_capacity(table.len() * n);
        for r in table.records() {
            let c = calendar(&r.timestamp);
            let trend = self
                .trend
                .scale((r.timestamp - self.origin).num_hours() as f64);
            let t = self.temperature.scale(r.temperature);
            let powers = [t, t * t, t * t * t];
            let start = data.len();
            data.resize(start + n, 0.0);
            let row = &mut data[start..];
            row[0] = 1.0;
            row[1] = trend;
            let mut k = 2;
            if c.hour > 0 {
                row[k + c.hour - 1] = 1.0;
            }
            k += HOURS - 1;
            if c.weekday > 0 {
                row[k + c.weekday - 1] = 1.0;
            }
            k += WEEKDAYS - 1;
            if c.month > 0 {
                row[k + c.month - 1] = 1.0;
            }
            k += MONTHS - 1;
            if c.hour > 0 && c.weekday > 0 {
                row[k + (c.hour - 1) * (WEEKDAYS - 1) + c.weekday - 1] = 1.0;
            }
            k += (HOURS - 1) * (WEEKDAYS - 1);
            row[k..k + 3].copy_from_slice(&powers);
            k += 3;
            for p in powers {
                if c.hour > 0 {
                    row[k + c.hour - 1] = p;
                }
                k += HOURS - 1;
            }
            for p in powers {
                if c.month > 0 {
                    row[k + c.month - 1] = p;
                }
                k += MONTHS - 1;
            }
            debug_assert_eq!(k, n);
        }
        Ok(Matrix::new(table.len(), n, data)?)
    }
}

/// Fits a schema on `table` and returns its design, loads and schema.
pub fn build_features(table: &LoadTable) -> Result<(Matrix, Vec<f64>, FeatureSchema)> {
    let schema = FeatureSchema::fit(table)?;
    let x = schema.design(table)?;
    Ok((x, table.loads(), schema))
}
