use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{apply_attack, mape, AttackSpec, FeatureSchema, LoadError, LoadTable};
use crate::baselines::fit_ols;
use crate::error::{Error, Result};
use crate::sarm::{sarm_fit, SarmConfig};
use crate::stats::mad;
use crate::tssarm::{tssarm_fit_detailed, TssarmConfig};

/// Consistency constant taking a MAD to a Gaussian standard deviation.
pub const MAD_CONSISTENCY: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForecastMethod {
    Mlr,
    Sarm,
    Tssarm,
}

impl fmt::Display for ForecastMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mlr => "mlr",
            Self::Sarm => "sarm",
            Self::Tssarm => "tssarm",
        })
    }
}

impl std::str::FromStr for ForecastMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mlr" | "ols" => Ok(Self::Mlr),
            "sarm" => Ok(Self::Sarm),
            "tssarm" => Ok(Self::Tssarm),
            other => Err(Error::InvalidConfig(format!("unknown forecast method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastOptions {
    /// `δ = delta_factor · σ̂²`.
    pub delta_factor: f64,
    pub eta: f64,
    /// `δ_pre = delta_pre_factor · δ`.
    pub delta_pre_factor: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ForecastOptions {
    fn default() -> Self {
        Self {
            delta_factor: 6.0,
            eta: crate::tssarm::DEFAULT_ETA,
            delta_pre_factor: crate::tssarm::DEFAULT_DELTA_PRE_FACTOR,
            tol: crate::sarm::DEFAULT_TOL,
            max_iter: crate::sarm::DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub method: ForecastMethod,
    pub attack: Option<AttackSpec>,
    pub mape: f64,
    /// Noise scale plugged into `δ` (from MLR training residuals).
    pub sigma_hat: f64,
    pub delta: f64,
    pub iterations: usize,
    pub converged: bool,
    pub features: usize,
    pub train_rows: usize,
    pub test_rows: usize,
    /// Retained rank for the two-stage method; `features` otherwise.
    pub q: usize,
    pub fit_seconds: f64,
}

/// `1.4826 · MAD` of the given residuals.
pub fn mad_sigma(residuals: &[f64]) -> f64 {
    MAD_CONSISTENCY * mad(residuals)
}

/// Attacks the training loads (if requested), fits on the training split and
/// scores MAPE on the untouched test split with the training schema.
pub fn run_forecast_experiment(
    train: &LoadTable,
    test: &LoadTable,
    attack: Option<&AttackSpec>,
    method: ForecastMethod,
    options: &ForecastOptions,
) -> Result<ForecastReport> {
    if test.is_empty() {
        return Err(LoadError::Empty.into());
    }
    let attacked;
    let train = match attack {
        Some(spec) => {
            attacked = apply_attack(train, spec)?.table;
            &attacked
        }
        None => train,
    };
    let schema = FeatureSchema::fit(train)?;
    let x = schema.design(train)?;
    let y = train.loads();
    let x_test = schema.design(test)?;

    let start = Instant::now();
    let ols = fit_ols(&x, &y)?;
    let fitted = x.matvec(&ols)?;
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let sigma_hat = mad_sigma(&resid);
    let delta = options.delta_factor * sigma_hat * sigma_hat;
    let base = SarmConfig {
        tol: options.tol,
        max_iter: options.max_iter,
        ..SarmConfig::new(delta)
    };
    let (w, iterations, converged, q) = match method {
        ForecastMethod::Mlr => (ols, 1, true, x.cols()),
        ForecastMethod::Sarm => {
            let fit = sarm_fit(&x, &y, &base)?;
            (fit.w_hat, fit.iterations, fit.converged, x.cols())
        }
        ForecastMethod::Tssarm => {
            let cfg = TssarmConfig {
                eta: options.eta,
                delta_pre: options.delta_pre_factor * delta,
                ..TssarmConfig::new(base)
            };
            let d = tssarm_fit_detailed(&x, &y, &cfg)?;
            (d.fit.w_hat, d.fit.iterations, d.fit.converged, d.q)
        }
    };
    let fit_seconds = start.elapsed().as_secs_f64();
    let pred = x_test.matvec(&w)?;
    Ok(ForecastReport {
        method,
        attack: attack.copied(),
        mape: mape(&test.loads(), &pred)?,
        sigma_hat,
        delta,
        iterations,
        converged,
        features: schema.len(),
        train_rows: train.len(),
        test_rows: test.len(),
        q,
        fit_seconds,
    })
}
