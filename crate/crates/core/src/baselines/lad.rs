use super::{fit_ols, fit_weighted_ls, residuals, BaselineConfig, BaselineFit};
use crate::error::Result;
use crate::linalg::Matrix;

/// `‖y − Xw‖₁`.
pub fn l1_loss(x: &Matrix, y: &[f64], w: &[f64]) -> f64 {
    residuals(x, y, w).iter().map(|r| r.abs()).sum()
}

/// Least absolute deviations by IRLS with weights `1 / max(|rᵢ|, ε)`,
/// `ε = 1e-6 · max|y|`, started from OLS.
pub fn fit_lad(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    let w0 = fit_ols(x, y)?;
    fit_lad_from(x, y, w0, config)
}

/// [`fit_lad`] from a caller-supplied starting point.
pub fn fit_lad_from(
    x: &Matrix,
    y: &[f64],
    w0: Vec<f64>,
    config: &BaselineConfig,
) -> Result<BaselineFit> {
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let eps = 1e-6 * if scale > 0.0 { scale } else { 1.0 };
    let mut w = w0;
    let mut r = residuals(x, y, &w);
    let mut loss: f64 = r.iter().map(|v| v.abs()).sum();
    let mut weights = vec![0.0; x.rows()];
    for iter in 1..=config.lad_max_iter {
        for (wi, ri) in weights.iter_mut().zip(&r) {
            *wi = 1.0 / ri.abs().max(eps);
        }
        let next = fit_weighted_ls(x, y, &weights)?;
        let r_next = residuals(x, y, &next);
        let loss_next: f64 = r_next.iter().map(|v| v.abs()).sum();
        let change = (loss - loss_next).abs();
        // IRLS majorizes the ℓ1 loss, so the loss never increases in exact arithmetic
        if loss_next <= loss {
            w = next;
            r = r_next;
        }
        let done = change <= config.lad_inner_tol * loss_next.max(f64::MIN_POSITIVE);
        loss = loss.min(loss_next);
        if done {
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
        iterations: config.lad_max_iter,
        converged: false,
    })
}
