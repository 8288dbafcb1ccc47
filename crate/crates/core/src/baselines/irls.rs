use super::{fit_ols, fit_weighted_ls, residuals, BaselineConfig, BaselineFit, MAD_TO_SIGMA};
use crate::error::{Error, Result};
use crate::linalg::{dist2, Matrix};
use crate::stats::mad;

/// Tukey bisquare weight of a standardized residual.
#[inline]
pub fn bisquare_weight(u: f64, c: f64) -> f64 {
    if u.abs() <= c {
        let t = 1.0 - (u / c) * (u / c);
        t * t
    } else {
        0.0
    }
}

/// Bisquare M-estimate by iteratively reweighted least squares from the OLS
/// start, rescaling by `MAD / 0.6745` every iteration.
pub fn fit_irls_bisquare(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    let mut w = fit_ols(x, y)?;
    let mut weights = vec![0.0; x.rows()];
    for iter in 1..=config.max_iter {
        let r = residuals(x, y, &w);
        let scale = mad(&r) / MAD_TO_SIGMA;
        if scale == 0.0 {
            // more than half the rows are fit exactly
            return Ok(BaselineFit {
                w,
                z: None,
                iterations: iter - 1,
                converged: true,
            });
        }
        for (wi, ri) in weights.iter_mut().zip(&r) {
            *wi = bisquare_weight(ri / scale, config.bisquare_c);
        }
        if weights.iter().all(|&v| v == 0.0) {
            return Err(Error::AllZeroWeights);
        }
        let next = fit_weighted_ls(x, y, &weights)?;
        let change = dist2(&next, &w);
        w = next;
        if change <= config.tol {
            return Ok(BaselineFit {
                w,
                z: None,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(BaselineFit {
        w,
        z: None,
        iterations: config.max_iter,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::BISQUARE_C;
    use crate::linalg::norm2;
    use crate::random::{seeded_rng, Gaussian};

    #[test]
    fn weight_endpoints() {
        assert_eq!(bisquare_weight(0.0, 4.685), 1.0);
        assert_eq!(bisquare_weight(4.685, 4.685), 0.0);
        assert_eq!(bisquare_weight(-10.0, 4.685), 0.0);
        assert!((bisquare_weight(2.0, 4.0) - 0.5625).abs() < 1e-15);
    }

    #[test]
    fn close_to_ols_on_clean_gaussian_data() {
        let mut worst: f64 = 0.0;
        for seed in 0..10 {
            let mut rng = seeded_rng(seed);
            let mut g = Gaussian::new();
            let x = Matrix::from_fn(200, 5, |_, _| g.sample(&mut rng));
            let w_true: Vec<f64> = (0..5).map(|_| g.sample(&mut rng)).collect();
            let mut y = x.matvec(&w_true).unwrap();
            for v in y.iter_mut() {
                *v += 0.1 * g.sample(&mut rng);
            }
            let ols = fit_ols(&x, &y).unwrap();
            let fit = fit_irls_bisquare(&x, &y, &BaselineConfig::default()).unwrap();
            worst = worst.max(dist2(&fit.w, &ols) / norm2(&ols));
        }
        assert!(worst <= 0.02, "worst relative gap {worst}");
    }

    #[test]
    fn gross_outlier_gets_zero_weight() {
        let mut rng = seeded_rng(9);
        let mut g = Gaussian::new();
        let x = Matrix::from_fn(50, 2, |_, _| g.sample(&mut rng));
        let mut y = x.matvec(&[1.0, -1.0]).unwrap();
        for v in y.iter_mut() {
            *v += 0.1 * g.sample(&mut rng);
        }
        y[7] += 50.0;
        let fit = fit_irls_bisquare(&x, &y, &BaselineConfig::default()).unwrap();
        assert!(fit.converged);
        let r = residuals(&x, &y, &fit.w);
        let scale = mad(&r) / MAD_TO_SIGMA;
        assert_eq!(bisquare_weight(r[7] / scale, BISQUARE_C), 0.0);
        assert!(dist2(&fit.w, &[1.0, -1.0]) < 0.1);
    }

    #[test]
    fn deterministic() {
        let mut rng = seeded_rng(1);
        let mut g = Gaussian::new();
        let x = Matrix::from_fn(60, 3, |_, _| g.sample(&mut rng));
        let y: Vec<f64> = (0..60).map(|_| g.sample(&mut rng)).collect();
        let a = fit_irls_bisquare(&x, &y, &BaselineConfig::default()).unwrap();
        let b = fit_irls_bisquare(&x, &y, &BaselineConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
