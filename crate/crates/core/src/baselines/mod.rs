//! Comparison estimators: least squares variants, M-estimation, ℓ1 and
//! thresholding/greedy outlier pursuit.

mod gard;
mod irls;
mod lad;
mod ols;
mod threshold;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gard::fit_gard;
pub use irls::{bisquare_weight, fit_irls_bisquare};
pub use lad::{fit_lad, fit_lad_from, l1_loss};
pub use ols::{fit_ideal, fit_ols, fit_oracle, fit_weighted_ls};
pub use threshold::{fit_arosi, fit_arosi_from, fit_ipod, fit_ipod_from, fit_tlrm, fit_tlrm_from};

pub const BISQUARE_C: f64 = 4.685;
/// MAD → σ for Gaussian data.
pub const MAD_TO_SIGMA: f64 = 0.6745;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Known inlier noise level; required by the thresholding and greedy methods.
    pub sigma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub bisquare_c: f64,
    /// Outlier cut at `threshold_multiplier · σ`.
    pub threshold_multiplier: f64,
    /// Relative objective-change tolerance of the ℓ1 solver.
    pub lad_inner_tol: f64,
    pub lad_max_iter: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            sigma: None,
            tol: 1e-6,
            max_iter: 1000,
            bisquare_c: BISQUARE_C,
            threshold_multiplier: 5.0,
            lad_inner_tol: 1e-8,
            lad_max_iter: 500,
        }
    }
}

impl BaselineConfig {
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            sigma: Some(sigma),
            ..Self::default()
        }
    }

    pub(crate) fn require_sigma(&self, method: &'static str) -> Result<f64> {
        match self.sigma {
            Some(s) if s > 0.0 && s.is_finite() => Ok(s),
            Some(s) => Err(Error::InvalidConfig(format!("{method}: sigma must be > 0, got {s}"))),
            None => Err(Error::MissingInput(method)),
        }
    }

    pub(crate) fn threshold(&self, method: &'static str) -> Result<f64> {
        Ok(self.threshold_multiplier * self.require_sigma(method)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub w: Vec<f64>,
    /// Outlier estimate for the methods that produce one.
    pub z: Option<Vec<f64>>,
    pub iterations: usize,
    /// False when the iteration cap was hit or, for GARD, the residual
    /// bound was never met.
    pub converged: bool,
}

pub(crate) fn residuals(x: &crate::linalg::Matrix, y: &[f64], w: &[f64]) -> Vec<f64> {
    (0..x.rows())
        .map(|i| y[i] - crate::linalg::dot(x.row(i), w))
        .collect()
}
