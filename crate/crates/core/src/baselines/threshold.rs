//! Support-pursuit estimators built on hard thresholding of residuals:
//! the alternating trimmed-loss iteration (squared loss: TLRM, absolute
//! loss: AROSI) and IPOD.

use super::{fit_lad, fit_lad_from, fit_ols, residuals, BaselineConfig, BaselineFit};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_upper, dist2, solve_upper_triangular, Matrix};
use crate::sarm::check_inputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loss {
    Squared,
    Absolute,
}

impl Loss {
    fn eval(self, x: &Matrix, y: &[f64], w: &[f64]) -> f64 {
        let r = residuals(x, y, w);
        match self {
            Loss::Squared => r.iter().map(|v| v * v).sum(),
            Loss::Absolute => r.iter().map(|v| v.abs()).sum(),
        }
    }
}

fn hard_threshold(r: &[f64], threshold: f64) -> Vec<f64> {
    r.iter()
        .map(|&v| if v.abs() <= threshold { 0.0 } else { v })
        .collect()
}

/// Alternates a fit on the current inlier set with re-flagging every row
/// whose residual exceeds the threshold. Stops once the inlier set repeats.
fn alternate(
    x: &Matrix,
    y: &[f64],
    config: &BaselineConfig,
    loss: Loss,
    threshold: f64,
    mut w: Vec<f64>,
    mut inlier: Vec<bool>,
) -> Result<BaselineFit> {
    let mut z = vec![0.0; x.rows()];
    for iter in 1..=config.max_iter {
        let rows: Vec<usize> = (0..x.rows()).filter(|&i| inlier[i]).collect();
        if rows.is_empty() {
            return Err(Error::EmptyInlierSet);
        }
        let xs = x.select_rows(&rows);
        let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
        let mut w_next = match loss {
            Loss::Squared => fit_ols(&xs, &ys)?,
            Loss::Absolute if w.iter().all(|&v| v == 0.0) => fit_lad(&xs, &ys, config)?.w,
            Loss::Absolute => fit_lad_from(&xs, &ys, w.clone(), config)?.w,
        };
        let before = loss.eval(&xs, &ys, &w);
        let after = loss.eval(&xs, &ys, &w_next);
        if (after - before).abs() <= 1e-12 * before.abs() {
            // no strict improvement on this support: keep the previous iterate
            w_next = w.clone();
        }
        w = w_next;
        z = hard_threshold(&residuals(x, y, &w), threshold);
        let next: Vec<bool> = z.iter().map(|&v| v == 0.0).collect();
        if !next.iter().any(|&b| b) {
            return Err(Error::EmptyInlierSet);
        }
        if next == inlier {
            return Ok(BaselineFit {
                w,
                z: Some(z),
                iterations: iter,
                converged: true,
            });
        }
        inlier = next;
    }
    Ok(BaselineFit {
        w,
        z: Some(z),
        iterations: config.max_iter,
        converged: false,
    })
}

fn start_from(
    x: &Matrix,
    y: &[f64],
    w_init: Vec<f64>,
    threshold: f64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    if w_init.len() != x.cols() {
        return Err(Error::LengthMismatch {
            expected: x.cols(),
            got: w_init.len(),
        });
    }
    let inlier = residuals(x, y, &w_init)
        .iter()
        .map(|r| r.abs() <= threshold)
        .collect();
    Ok((w_init, inlier))
}

/// Trimmed least squares from `w = 0` and all rows inlying; outliers are
/// rows with `|rᵢ| > threshold_multiplier · σ`.
pub fn fit_tlrm(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let t = config.threshold("tlrm")?;
    alternate(x, y, config, Loss::Squared, t, vec![0.0; x.cols()], vec![true; x.rows()])
}

/// [`fit_tlrm`] with the first inlier set taken from the residuals at `w_init`.
pub fn fit_tlrm_from(
    x: &Matrix,
    y: &[f64],
    w_init: Vec<f64>,
    config: &BaselineConfig,
) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let t = config.threshold("tlrm")?;
    let (w, s) = start_from(x, y, w_init, t)?;
    alternate(x, y, config, Loss::Squared, t, w, s)
}

/// The same alternation with an ℓ1 fit on each inlier set.
pub fn fit_arosi(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let t = config.threshold("arosi")?;
    alternate(x, y, config, Loss::Absolute, t, vec![0.0; x.cols()], vec![true; x.rows()])
}

pub fn fit_arosi_from(
    x: &Matrix,
    y: &[f64],
    w_init: Vec<f64>,
    config: &BaselineConfig,
) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let t = config.threshold("arosi")?;
    let (w, s) = start_from(x, y, w_init, t)?;
    alternate(x, y, config, Loss::Absolute, t, w, s)
}

/// IPOD from the ℓ1 estimate.
pub fn fit_ipod(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    config.threshold("ipod")?;
    let w0 = fit_lad(x, y, config)?.w;
    fit_ipod_from(x, y, w0, config)
}

/// Iterates `z = HT(y − Xw)`, `w = OLS(X, y − z)` until `‖Δw‖₂ ≤ tol`.
pub fn fit_ipod_from(
    x: &Matrix,
    y: &[f64],
    w_init: Vec<f64>,
    config: &BaselineConfig,
) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let t = config.threshold("ipod")?;
    if w_init.len() != x.cols() {
        return Err(Error::LengthMismatch {
            expected: x.cols(),
            got: w_init.len(),
        });
    }
    let factor = cholesky_upper(&x.gram())?;
    let mut w = w_init;
    let mut z = vec![0.0; x.rows()];
    for iter in 1..=config.max_iter {
        z = hard_threshold(&residuals(x, y, &w), t);
        let target: Vec<f64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
        let b = x.transpose_matvec(&target)?;
        let u = solve_upper_triangular(&factor, &b, true)?;
        let next = solve_upper_triangular(&factor, &u, false)?;
        let change = dist2(&next, &w);
        w = next;
        if change <= config.tol {
            return Ok(BaselineFit {
                w,
                z: Some(z),
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(BaselineFit {
        w,
        z: Some(z),
        iterations: config.max_iter,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::fit_oracle;
    use crate::linalg::norm2;
    use crate::random::{seeded_rng, Gaussian};

    struct Case {
        x: Matrix,
        y: Vec<f64>,
        support: Vec<usize>,
    }

    fn case(m: usize, n: usize, sigma: f64, outliers: &[(usize, f64)], seed: u64) -> Case {
        let mut rng = seeded_rng(seed);
        let mut g = Gaussian::new();
        let x = Matrix::from_fn(m, n, |_, _| g.sample(&mut rng));
        let w_true: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)).collect();
        let mut y = x.matvec(&w_true).unwrap();
        for v in y.iter_mut() {
            *v += sigma * g.sample(&mut rng);
        }
        for &(i, v) in outliers {
            y[i] += v;
        }
        Case {
            x,
            y,
            support: outliers.iter().map(|o| o.0).collect(),
        }
    }

    #[test]
    fn requires_sigma() {
        let c = case(20, 2, 0.1, &[], 1);
        assert!(matches!(
            fit_tlrm(&c.x, &c.y, &BaselineConfig::default()),
            Err(Error::MissingInput("tlrm"))
        ));
    }

    #[test]
    fn tlrm_clean_returns_ols_in_one_iteration() {
        let c = case(100, 3, 0.1, &[], 2);
        let fit = fit_tlrm(&c.x, &c.y, &BaselineConfig::with_sigma(0.1)).unwrap();
        assert_eq!(fit.iterations, 1);
        assert_eq!(fit.w, fit_ols(&c.x, &c.y).unwrap());
        assert!(fit.z.unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn tlrm_single_outlier_matches_oracle() {
        let c = case(100, 3, 0.1, &[(17, 40.0)], 3);
        let fit = fit_tlrm(&c.x, &c.y, &BaselineConfig::with_sigma(0.1)).unwrap();
        let oracle = fit_oracle(&c.x, &c.y, &c.support).unwrap();
        assert!(dist2(&fit.w, &oracle) < 1e-12);
        let z = fit.z.unwrap();
        assert!(z[17] != 0.0);
        assert_eq!(z.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn arosi_clean_equals_lad() {
        let c = case(80, 3, 0.1, &[], 4);
        let cfg = BaselineConfig::with_sigma(0.1);
        let fit = fit_arosi(&c.x, &c.y, &cfg).unwrap();
        let lad = fit_lad(&c.x, &c.y, &cfg).unwrap();
        assert_eq!(fit.w, lad.w);
        assert!(fit.z.unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn arosi_empty_inlier_set() {
        let c = case(30, 2, 0.1, &[], 5);
        let mut cfg = BaselineConfig::with_sigma(0.1);
        cfg.threshold_multiplier = 0.0;
        assert!(matches!(fit_arosi(&c.x, &c.y, &cfg), Err(Error::EmptyInlierSet)));
    }

    #[test]
    fn thresholded_z_is_exactly_sparse() {
        let outliers: Vec<(usize, f64)> = (0..20).map(|i| (i * 3, 30.0)).collect();
        let c = case(120, 4, 0.5, &outliers, 6);
        let cfg = BaselineConfig::with_sigma(0.5);
        for fit in [
            fit_tlrm(&c.x, &c.y, &cfg).unwrap(),
            fit_arosi(&c.x, &c.y, &cfg).unwrap(),
            fit_ipod(&c.x, &c.y, &cfg).unwrap(),
        ] {
            let z = fit.z.unwrap();
            assert!(z.iter().all(|&v| v == 0.0 || v.abs() > 2.5));
        }
    }

    #[test]
    fn ipod_clean_converges_to_ols() {
        let c = case(100, 3, 0.1, &[], 7);
        let fit = fit_ipod(&c.x, &c.y, &BaselineConfig::with_sigma(0.1)).unwrap();
        let ols = fit_ols(&c.x, &c.y).unwrap();
        assert!(dist2(&fit.w, &ols) <= 1e-9 * norm2(&ols));
        assert!(fit.z.unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ipod_and_tlrm_share_fixed_point_from_same_start() {
        for seed in 0..10 {
            let outliers: Vec<(usize, f64)> = (0..15).map(|i| (i * 4 + 1, 25.0 - 2.0 * i as f64)).collect();
            let c = case(150, 4, 0.3, &outliers, 100 + seed);
            let cfg = BaselineConfig::with_sigma(0.3);
            let start = fit_ols(&c.x, &c.y).unwrap();
            let a = fit_tlrm_from(&c.x, &c.y, start.clone(), &cfg).unwrap();
            let b = fit_ipod_from(&c.x, &c.y, start, &cfg).unwrap();
            let rel = dist2(&a.w, &b.w) / norm2(&a.w);
            assert!(rel < 1e-5, "seed {seed}: {rel}");
            // the two smallest shifts sit near the threshold; the rest must be caught
            let oracle = fit_oracle(&c.x, &c.y, &c.support).unwrap();
            let err = dist2(&a.w, &oracle) / norm2(&oracle);
            assert!(err < 0.05, "seed {seed}: {err}");
        }
    }

    #[test]
    fn deterministic() {
        let outliers: Vec<(usize, f64)> = (0..10).map(|i| (i * 5, 20.0)).collect();
        let c = case(90, 3, 0.2, &outliers, 8);
        let cfg = BaselineConfig::with_sigma(0.2);
        assert_eq!(fit_arosi(&c.x, &c.y, &cfg).unwrap(), fit_arosi(&c.x, &c.y, &cfg).unwrap());
        assert_eq!(fit_ipod(&c.x, &c.y, &cfg).unwrap(), fit_ipod(&c.x, &c.y, &cfg).unwrap());
    }
}
