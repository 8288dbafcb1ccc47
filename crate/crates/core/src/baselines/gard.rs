//! Greedy outlier pursuit: orthogonal matching pursuit over `[X, I]` with
//! the columns of `X` always active.

use super::{BaselineConfig, BaselineFit};
use crate::error::Result;
use crate::linalg::{self, solve_spd, Matrix};
use crate::sarm::check_inputs;

/// Least squares over the columns of `X` plus the identity columns in
/// `atoms`, via the full `(n + K)`-dimensional normal equations.
fn solve_active(
    x: &Matrix,
    y: &[f64],
    gram: &Matrix,
    xty: &[f64],
    atoms: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.cols();
    let k = atoms.len();
    let dim = n + k;
    let mut a = Matrix::zeros(dim, dim).into_vec();
    for i in 0..n {
        for j in 0..n {
            a[i * dim + j] = gram.get(i, j);
        }
    }
    for (t, &row) in atoms.iter().enumerate() {
        let xr = x.row(row);
        for j in 0..n {
            a[(n + t) * dim + j] = xr[j];
            a[j * dim + n + t] = xr[j];
        }
        a[(n + t) * dim + n + t] = 1.0;
    }
    let mut b = xty.to_vec();
    b.extend(atoms.iter().map(|&i| y[i]));
    let sol = solve_spd(&Matrix::new(dim, dim, a)?, &b)?;
    Ok((sol[..n].to_vec(), sol[n..].to_vec()))
}

/// Adds one outlier atom at a time, choosing the largest absolute residual,
/// until `‖y − Xw − z‖₂ ≤ √m·σ` or `m − n` atoms are active. Exhausting the
/// atoms without meeting the bound is reported as `converged = false`.
pub fn fit_gard(x: &Matrix, y: &[f64], config: &BaselineConfig) -> Result<BaselineFit> {
    check_inputs(x, y)?;
    let sigma = config.require_sigma("gard")?;
    let (m, n) = x.shape();
    let bound = (m as f64).sqrt() * sigma;
    let gram = x.gram();
    let xty = x.transpose_matvec(y)?;
    let mut atoms: Vec<usize> = Vec::new();
    let mut active = vec![false; m];
    loop {
        let (w, coef) = solve_active(x, y, &gram, &xty, &atoms)?;
        let mut z = vec![0.0; m];
        for (&i, &c) in atoms.iter().zip(&coef) {
            z[i] = c;
        }
        let r: Vec<f64> = (0..m)
            .map(|i| y[i] - linalg::dot(x.row(i), &w) - z[i])
            .collect();
        let done = linalg::norm2(&r) <= bound;
        if done || atoms.len() >= m - n {
            return Ok(BaselineFit {
                w,
                z: Some(z),
                iterations: atoms.len(),
                converged: done,
            });
        }
        let next = (0..m)
            .filter(|&i| !active[i])
            .max_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs()).then(b.cmp(&a)))
            .expect("fewer than m - n atoms active");
        active[next] = true;
        atoms.push(next);
    }
}
