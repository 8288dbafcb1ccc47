//! Two-stage SARM for ill-conditioned designs.
//!
//! The design is whitened through the eigendecomposition of `XᵀX`
//! (`Z = X V diag(1/sᵢ)`, orthonormal columns). Stage one runs the SARM
//! iteration on the `q` leading directions with an inflated `δ_pre`; stage
//! two runs on all of `Z` warm-started from `[w_pre; 0]` and `z_pre`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, LinalgError, Matrix, CHOLESKY_PIVOT_EPS};
use crate::sarm::{check_inputs, run_loop, sarm_fit, LoopParams, RegressionFit, SarmConfig, SolveTrace};

pub const DEFAULT_ETA: f64 = 0.005;
pub const DEFAULT_DELTA_PRE_FACTOR: f64 = 2.0;

/// Which δ the stage-one z-threshold uses. The published iteration thresholds
/// on the base δ while its w-step uses `δ_pre`; `Pre` uses `δ_pre` for both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Stage1Threshold {
    #[default]
    Base,
    Pre,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TssarmConfig {
    pub base: SarmConfig,
    pub eta: f64,
    pub delta_pre: f64,
    pub stage1_threshold: Stage1Threshold,
}

impl TssarmConfig {
    pub fn new(base: SarmConfig) -> Self {
        Self {
            base,
            eta: DEFAULT_ETA,
            delta_pre: DEFAULT_DELTA_PRE_FACTOR * base.delta,
            stage1_threshold: Stage1Threshold::Base,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidConfig(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.delta_pre >= self.base.delta && self.delta_pre.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta_pre ({}) must be >= delta ({})",
                self.delta_pre, self.base.delta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SpectralSplit {
    pub q: usize,
    /// Eigenvalues of `XᵀX`, descending (squared singular values of `X`).
    pub eigvals: Vec<f64>,
    pub eigvecs: Matrix,
}

impl SpectralSplit {
    pub fn singular_values(&self) -> Vec<f64> {
        self.eigvals.iter().map(|l| l.max(0.0).sqrt()).collect()
    }
}

/// Smallest `q ≥ 1` with `s[q] < η·s[0]` (0-based), or `s.len()` if none.
pub fn select_rank(singular_values: &[f64], eta: f64) -> Result<usize> {
    let first = *singular_values.first().ok_or(Error::EmptySpectrum)?;
    Ok(singular_values
        .iter()
        .skip(1)
        .position(|&s| s < eta * first)
        .map_or(singular_values.len(), |i| i + 1))
}

pub fn spectral_split(x: &Matrix, eta: f64) -> Result<SpectralSplit> {
    let eig = sym_eig(&x.gram())?;
    let n = eig.values.len();
    let trace: f64 = eig.values.iter().sum();
    let floor = CHOLESKY_PIVOT_EPS * trace / n.max(1) as f64;
    if let Some(&last) = eig.values.last() {
        if last <= floor {
            return Err(LinalgError::NotPositiveDefinite {
                index: n - 1,
                pivot: last,
            }
            .into());
        }
    }
    let s: Vec<f64> = eig.values.iter().map(|l| l.sqrt()).collect();
    let q = select_rank(&s, eta)?;
    Ok(SpectralSplit {
        q,
        eigvals: eig.values,
        eigvecs: eig.vectors,
    })
}

/// Whitened design `X V diag(1/s)` and the map `V diag(1/s)` back to `w`.
fn whiten(x: &Matrix, split: &SpectralSplit) -> Result<(Matrix, Matrix)> {
    let inv_s: Vec<f64> = split.singular_values().iter().map(|s| 1.0 / s).collect();
    let back = split.eigvecs.scale_columns(&inv_s)?;
    Ok((x.matmul(&back)?, back))
}

#[derive(Debug, Clone)]
pub struct TssarmFit {
    /// Final fit; `iterations` and `trace` describe stage two.
    pub fit: RegressionFit,
    pub q: usize,
    /// Zero when the spectrum is balanced and plain SARM was run.
    pub stage1_iterations: usize,
    pub stage1_converged: bool,
    pub stage1_trace: Option<SolveTrace>,
}

pub fn tssarm_fit(x: &Matrix, y: &[f64], config: &TssarmConfig) -> Result<RegressionFit> {
    tssarm_fit_detailed(x, y, config).map(|d| d.fit)
}

pub fn tssarm_fit_detailed(x: &Matrix, y: &[f64], config: &TssarmConfig) -> Result<TssarmFit> {
    config.validate()?;
    check_inputs(x, y)?;
    let start = Instant::now();
    let split = spectral_split(x, config.eta)?;
    let n = x.cols();
    let m = x.rows();
    if split.q == n {
        let mut fit = sarm_fit(x, y, &config.base)?;
        fit.wall_time = start.elapsed().as_secs_f64();
        return Ok(TssarmFit {
            fit,
            q: n,
            stage1_iterations: 0,
            stage1_converged: true,
            stage1_trace: None,
        });
    }

    let (z_full, back) = whiten(x, &split)?;
    let z_lead = z_full.leading_columns(split.q);
    let base = config.base.loop_params();
    let stage1 = LoopParams {
        delta_w: config.delta_pre,
        delta_z: match config.stage1_threshold {
            Stage1Threshold::Base => config.base.delta,
            Stage1Threshold::Pre => config.delta_pre,
        },
        ..base
    };
    let loop_start = Instant::now();
    let pre = run_loop(&z_lead, y, vec![0.0; split.q], vec![0.0; m], &stage1);
    let mut w0 = pre.w.clone();
    w0.resize(n, 0.0);
    let out = run_loop(&z_full, y, w0, pre.z, &base);
    let loop_time = loop_start.elapsed().as_secs_f64();
    let w_hat = back.matvec(&out.w)?;
    Ok(TssarmFit {
        fit: RegressionFit {
            w_hat,
            z_hat: out.z,
            iterations: out.iterations,
            converged: out.converged,
            trace: out.trace,
            wall_time: start.elapsed().as_secs_f64(),
            loop_time,
        },
        q: split.q,
        stage1_iterations: pre.iterations,
        stage1_converged: pre.converged,
        stage1_trace: pre.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fit_ols;
    use crate::linalg::{dist2, norm2};
    use crate::random::{seeded_rng, Gaussian};

    /// Gaussian design with its last `k` columns squeezed by `scale`.
    fn skewed_design(m: usize, n: usize, k: usize, scale: f64, seed: u64) -> Matrix {
        let mut rng = seeded_rng(seed);
        let mut g = Gaussian::new();
        Matrix::from_fn(m, n, |_, j| {
            let v = g.sample(&mut rng);
            if j >= n - k {
                v * scale
            } else {
                v
            }
        })
    }

    #[test]
    fn select_rank_examples() {
        assert_eq!(select_rank(&[10.0, 5.0, 0.04], 0.005).unwrap(), 2);
        assert_eq!(select_rank(&[3.0, 2.0, 1.0], 0.005).unwrap(), 3);
        assert_eq!(select_rank(&[1.0, 1e-9], 0.005).unwrap(), 1);
        assert!(matches!(select_rank(&[], 0.005), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn config_validation() {
        let base = SarmConfig::new(1.0);
        assert!(TssarmConfig::new(base).validate().is_ok());
        let mut c = TssarmConfig::new(base);
        c.eta = 1.5;
        assert!(c.validate().is_err());
        let mut c = TssarmConfig::new(base);
        c.delta_pre = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn leading_block_is_orthonormal_and_tail_norm_matches() {
        let x = skewed_design(200, 6, 2, 1e-3, 1);
        let split = spectral_split(&x, 0.005).unwrap();
        assert_eq!(split.q, 4);
        let (z, _) = whiten(&x, &split).unwrap();
        let lead = z.leading_columns(split.q);
        let g = lead.gram();
        for i in 0..split.q {
            for j in 0..split.q {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g.get(i, j) - e).abs() <= 1e-8);
            }
        }
        // ‖X V_tail‖₂ = s_{q+1}: the tail block's Gram is diagonal with the tail eigenvalues
        let s = split.singular_values();
        let xv = x.matmul(&split.eigvecs).unwrap();
        let tail_col = xv.column(split.q);
        assert!((norm2(&tail_col) - s[split.q]).abs() <= 1e-8 * s[0]);
    }

    #[test]
    fn balanced_spectrum_degenerates_to_sarm() {
        let x = skewed_design(120, 5, 0, 1.0, 2);
        let mut y = x.matvec(&[1.0, -1.0, 2.0, 0.0, 0.5]).unwrap();
        y[3] += 20.0;
        let base = SarmConfig::new(0.05);
        let a = tssarm_fit_detailed(&x, &y, &TssarmConfig::new(base)).unwrap();
        let b = sarm_fit(&x, &y, &base).unwrap();
        assert_eq!(a.q, 5);
        assert!(dist2(&a.fit.w_hat, &b.w_hat) <= 1e-10 * norm2(&b.w_hat));
    }

    #[test]
    fn clean_noiseless_two_stage_equals_ols() {
        let x = skewed_design(150, 6, 2, 1e-3, 3);
        let w_true = [1.0, 2.0, -1.0, 0.5, 3.0, -2.0];
        let y = x.matvec(&w_true).unwrap();
        let d = tssarm_fit_detailed(&x, &y, &TssarmConfig::new(SarmConfig::new(1e-4))).unwrap();
        assert!(d.q < 6);
        let ols = fit_ols(&x, &y).unwrap();
        assert!(dist2(&d.fit.w_hat, &ols) <= 1e-8 * norm2(&ols));
    }

    #[test]
    fn stage_two_descends_from_warm_start() {
        let x = skewed_design(200, 6, 2, 1e-3, 4);
        let mut rng = seeded_rng(5);
        let mut g = Gaussian::new();
        let mut y = x.matvec(&[1.0; 6]).unwrap();
        for (i, v) in y.iter_mut().enumerate() {
            *v += 0.05 * g.sample(&mut rng) + if i % 5 == 0 { 4.0 } else { 0.0 };
        }
        let cfg = TssarmConfig::new(SarmConfig::new(6.0 * 0.0025).with_trace(true));
        let d = tssarm_fit_detailed(&x, &y, &cfg).unwrap();
        assert!(d.q < 6);
        let t = d.fit.trace.as_ref().unwrap();
        assert!(t.decrements().iter().all(|&v| v >= -1e-10));
        assert!(d.stage1_trace.is_some());
    }

    #[test]
    fn rank_deficient_design_rejected() {
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        let cfg = TssarmConfig::new(SarmConfig::new(1.0));
        assert!(tssarm_fit(&x, &[1.0, 2.0, 3.0], &cfg).is_err());
    }
}
