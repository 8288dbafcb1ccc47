//! Hourly load forecasting with calendar/temperature regression features,
//! multiplicative data-integrity attacks on training loads, and MAPE scoring.

mod attack;
mod csvio;
mod features;
mod forecast;
mod synth;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use attack::{apply_attack, AttackKind, AttackOutcome, AttackSpec, AttackTarget};
pub use csvio::{ingest_csv, read_csv, write_csv, TIMESTAMP_FORMAT};
pub use features::{build_features, FeatureSchema, MinMax, TAO_FEATURE_COUNT};
pub use forecast::{
    mad_sigma, run_forecast_experiment, ForecastMethod, ForecastOptions, ForecastReport,
};
pub use synth::{synthetic_table, SyntheticLoadSpec};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("timestamps not strictly increasing at row {row}")]
    NonMonotoneTimestamps { row: usize },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("training data has no {block} level {level}")]
    InsufficientCoverage { block: &'static str, level: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("actual value at index {0} is zero")]
    ZeroActual(usize),
    #[error("invalid attack spec: {0}")]
    InvalidSpec(String),
    #[error("empty table")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadRecord {
    pub timestamp: NaiveDateTime,
    /// MW, strictly positive.
    pub load: f64,
    pub temperature: f64,
}

/// Records with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadTable {
    records: Vec<LoadRecord>,
}

impl LoadTable {
    pub fn new(records: Vec<LoadRecord>) -> Result<Self, LoadError> {
        for (i, pair) in records.windows(2).enumerate() {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(LoadError::NonMonotoneTimestamps { row: i + 2 });
            }
        }
        for (i, r) in records.iter().enumerate() {
            if !(r.load > 0.0 && r.load.is_finite()) {
                return Err(LoadError::Parse {
                    row: i + 1,
                    message: format!("load must be positive, got {}", r.load),
                });
            }
            if !r.temperature.is_finite() {
                return Err(LoadError::Parse {
                    row: i + 1,
                    message: "temperature is not finite".into(),
                });
            }
        }
        Ok(Self { records })
    }

    pub fn records(&self) -> &[LoadRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn loads(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.load).collect()
    }

    /// Number of missing hours between consecutive records.
    pub fn gaps(&self) -> usize {
        self.records
            .windows(2)
            .map(|p| ((p[1].timestamp - p[0].timestamp).num_hours() - 1).max(0) as usize)
            .sum()
    }

    /// Splits at the first record whose timestamp is `>= at`.
    pub fn split_at(&self, at: NaiveDateTime) -> (LoadTable, LoadTable) {
        let k = self.records.partition_point(|r| r.timestamp < at);
        (
            LoadTable {
                records: self.records[..k].to_vec(),
            },
            LoadTable {
                records: self.records[k..].to_vec(),
            },
        )
    }

    pub(crate) fn with_loads(&self, loads: &[f64]) -> LoadTable {
        LoadTable {
            records: self
                .records
                .iter()
                .zip(loads)
                .map(|(r, &load)| LoadRecord { load, ..*r })
                .collect(),
        }
    }
}

/// Mean absolute percentage error, in percent.
pub fn mape(y_true: &[f64], y_pred: &[f64]) -> crate::Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(crate::Error::LengthMismatch {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(LoadError::Empty.into());
    }
    if let Some(i) = y_true.iter().position(|&v| v == 0.0) {
        return Err(LoadError::ZeroActual(i).into());
    }
    let total: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(a, p)| ((a - p) / a).abs())
        .sum();
    Ok(100.0 * total / y_true.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn ts(h: u32) -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(h, 0, 0).unwrap()
    }

    #[test]
    fn mape_examples() {
        assert_eq!(mape(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(
            mape(&[1.0, 0.0], &[1.0, 1.0]),
            Err(crate::Error::Load(LoadError::ZeroActual(1)))
        ));
    }

    #[test]
    fn table_rejects_disorder_and_nonpositive_load() {
        let r = |h, load| LoadRecord {
            timestamp: ts(h),
            load,
            temperature: 10.0,
        };
        assert!(matches!(
            LoadTable::new(vec![r(1, 1.0), r(0, 1.0)]),
            Err(LoadError::NonMonotoneTimestamps { row: 2 })
        ));
        assert!(LoadTable::new(vec![r(0, 0.0)]).is_err());
        let t = LoadTable::new(vec![r(0, 1.0), r(3, 1.0), r(4, 2.0)]).unwrap();
        assert_eq!(t.gaps(), 2);
        let (a, b) = t.split_at(ts(3));
        assert_eq!((a.len(), b.len()), (1, 2));
    }
}
