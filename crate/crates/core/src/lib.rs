//! Robust linear regression under sparse gross corruption of the response.
//!
//! The main estimator, [`sarm::sarm_fit`], minimizes a least-squares loss
//! plus a self-scaled approximation of `‖z‖₀` over coefficients `w` and an
//! explicit outlier vector `z`. [`tssarm::tssarm_fit`] adds a spectral
//! pre-estimation stage for ill-conditioned designs. The [`baselines`]
//! module holds the comparison estimators, [`simgen`] the synthetic
//! scenarios, [`diagnostics`] the convergence checks, [`loadcast`] the
//! load-forecasting pipeline and [`experiment`] the Monte Carlo runner.

pub mod baselines;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod loadcast;
pub mod random;
pub mod sarm;
pub mod simgen;
pub mod smoothing;
pub mod stats;
pub mod tssarm;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use sarm::{sarm_fit, RegressionFit, SarmConfig, SolveTrace};
pub use simgen::{generate, relative_l2_error, ScenarioType, SimInstance, SimSpec};
pub use tssarm::{tssarm_fit, TssarmConfig};
