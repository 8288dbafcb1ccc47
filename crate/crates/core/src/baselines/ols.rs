use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix};
use crate::sarm::check_inputs;

/// Least squares through the Cholesky-factored normal equations.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    let b = x.transpose_matvec(y)?;
    Ok(solve_spd(&x.gram(), &b)?)
}

/// Minimizes `Σ wᵢ (yᵢ − xᵢᵀβ)²`.
pub fn fit_weighted_ls(x: &Matrix, y: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    if weights.len() != x.rows() {
        return Err(Error::LengthMismatch {
            expected: x.rows(),
            got: weights.len(),
        });
    }
    let wy: Vec<f64> = y.iter().zip(weights).map(|(a, b)| a * b).collect();
    let b = x.transpose_matvec(&wy)?;
    Ok(solve_spd(&x.weighted_gram(weights)?, &b)?)
}

/// Least squares on the response with the true corruption removed.
pub fn fit_ideal(x: &Matrix, y: &[f64], z_true: &[f64]) -> Result<Vec<f64>> {
    if z_true.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            got: z_true.len(),
        });
    }
    let clean: Vec<f64> = y.iter().zip(z_true).map(|(a, b)| a - b).collect();
    fit_ols(x, &clean)
}

/// Least squares on the rows outside the known corruption support.
pub fn fit_oracle(x: &Matrix, y: &[f64], support: &[usize]) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    let mut keep = vec![true; x.rows()];
    for &i in support {
        if i >= x.rows() {
            return Err(Error::InvalidConfig(format!(
                "support index {i} out of range for {} rows",
                x.rows()
            )));
        }
        keep[i] = false;
    }
    let rows: Vec<usize> = (0..x.rows()).filter(|&i| keep[i]).collect();
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let xs = x.select_rows(&rows);
    if xs.rows() < xs.cols() {
        return Err(Error::Underdetermined {
            rows: xs.rows(),
            cols: xs.cols(),
        });
    }
    fit_ols(&xs, &ys)
}
