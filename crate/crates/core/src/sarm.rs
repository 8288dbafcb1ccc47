//! The SARM solver.
//!
//! Minimizes `H(w, z) = ½‖y − Xw − z‖² + δ Σ |zᵢ| / S(yᵢ − xᵢᵀw)` by
//! alternating one gradient step in `w` with an exact proximal step in `z`,
//! after preconditioning `X` to orthonormal columns (`Xp = X L⁻¹`,
//! `XᵀX = LᵀL`). Each iteration costs two matrix-vector products.
//!
//! The z-step uses the residual at the freshly updated `w`, so every
//! iteration is a block-coordinate descent step on `H` and the recorded
//! objective sequence is nonincreasing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cholesky_upper, solve_upper_triangular, Matrix};
use crate::smoothing::{gamma_fn, prox_z, smooth_s};

/// `δ = DEFAULT_DELTA_FACTOR · σ²` when the inlier noise level is known.
pub const DEFAULT_DELTA_FACTOR: f64 = 6.0;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SarmConfig {
    /// Regularization strength, in squared response units.
    pub delta: f64,
    /// Gradient step; the preconditioned design has unit spectral norm.
    pub alpha: f64,
    /// Stop once `|H^k − H^{k+1}| ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub record_trace: bool,
}

impl SarmConfig {
    pub fn new(delta: f64) -> Self {
        Self {
            delta,
            alpha: 1.0,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            record_trace: false,
        }
    }

    /// `δ = 6σ²`.
    pub fn from_sigma(sigma: f64) -> Self {
        Self::new(DEFAULT_DELTA_FACTOR * sigma * sigma)
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!("delta must be > 0, got {}", self.delta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 2], got {}",
                self.alpha
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub(crate) fn loop_params(&self) -> LoopParams {
        LoopParams {
            delta_w: self.delta,
            delta_z: self.delta,
            alpha: self.alpha,
            tol: self.tol,
            max_iter: self.max_iter,
            record: self.record_trace,
        }
    }
}

/// Per-iteration diagnostics. Entry `k` describes the step from iterate `k`
/// to iterate `k + 1`; `initial_objective` is `H` at the starting point.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub initial_objective: f64,
    pub objective_values: Vec<f64>,
    pub w_step_norms: Vec<f64>,
    pub z_step_norms: Vec<f64>,
    /// `‖∇_w H‖₂` at the iterate the step started from.
    pub grad_norms: Vec<f64>,
}

impl SolveTrace {
    fn new(initial_objective: f64) -> Self {
        Self {
            initial_objective,
            ..Self::default()
        }
    }

    pub fn len(&self) -> usize {
        self.objective_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objective_values.is_empty()
    }

    /// `H^{k} − H^{k+1}` for every recorded step.
    pub fn decrements(&self) -> Vec<f64> {
        let mut prev = self.initial_objective;
        self.objective_values
            .iter()
            .map(|&h| {
                let d = prev - h;
                prev = h;
                d
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionFit {
    /// Coefficients in the original feature space.
    pub w_hat: Vec<f64>,
    /// Estimated outlier vector, in response units.
    pub z_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Option<SolveTrace>,
    /// Seconds for the whole fit, preprocessing included.
    pub wall_time: f64,
    /// Seconds spent in the iteration loop only.
    pub loop_time: f64,
}

/// A design with orthonormal columns plus the upper factor that produced it.
#[derive(Debug, Clone)]
pub struct Preconditioned {
    pub xp: Matrix,
    pub factor: Matrix,
}

impl Preconditioned {
    /// Maps preconditioned coefficients back: `w = L⁻¹ w_p`.
    pub fn to_original(&self, wp: &[f64]) -> Result<Vec<f64>> {
        Ok(solve_upper_triangular(&self.factor, wp, false)?)
    }
}

/// `Xp = X L⁻¹` with `L` the upper Cholesky factor of `XᵀX`.
pub fn precondition(x: &Matrix) -> Result<Preconditioned> {
    if x.rows() < x.cols() {
        return Err(Error::Underdetermined {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    let factor = cholesky_upper(&x.gram())?;
    let n = x.cols();
    let mut data = Vec::with_capacity(x.rows() * n);
    for i in 0..x.rows() {
        // row of X L⁻¹ is (L⁻ᵀ xᵢ)ᵀ
        data.extend(solve_upper_triangular(&factor, x.row(i), true)?);
    }
    let xp = Matrix::new(x.rows(), n, data)?;
    Ok(Preconditioned { xp, factor })
}

fn check_shapes(xp: &Matrix, y: &[f64], w: &[f64], z: &[f64]) -> Result<()> {
    if y.len() != xp.rows() {
        return Err(Error::LengthMismatch {
            expected: xp.rows(),
            got: y.len(),
        });
    }
    if z.len() != xp.rows() {
        return Err(Error::LengthMismatch {
            expected: xp.rows(),
            got: z.len(),
        });
    }
    if w.len() != xp.cols() {
        return Err(Error::LengthMismatch {
            expected: xp.cols(),
            got: w.len(),
        });
    }
    Ok(())
}

fn residual(x: &Matrix, y: &[f64], w: &[f64]) -> Vec<f64> {
    (0..x.rows())
        .map(|i| y[i] - linalg::dot(x.row(i), w))
        .collect()
}

fn objective_from_residual(r: &[f64], z: &[f64], delta: f64) -> f64 {
    let half_sq: f64 = r.iter().zip(z).map(|(ri, zi)| (ri - zi) * (ri - zi)).sum::<f64>() * 0.5;
    let reg: f64 = r
        .iter()
        .zip(z)
        .filter(|(_, zi)| **zi != 0.0)
        .map(|(ri, zi)| {
            let s = smooth_s(*ri, delta);
            debug_assert!(s >= 0.5 * delta.sqrt() - 1e-12);
            zi.abs() / s
        })
        .sum();
    half_sq + delta * reg
}

/// Writes `v` with `∇_w H = Xᵀ v`, i.e. `vᵢ = zᵢ − rᵢ + δ|zᵢ| S'(rᵢ)/S(rᵢ)²`.
fn gradient_weights(r: &[f64], z: &[f64], delta: f64, v: &mut [f64]) {
    for ((vi, ri), zi) in v.iter_mut().zip(r).zip(z) {
        *vi = zi - ri;
        if *zi != 0.0 {
            *vi += delta * zi.abs() * gamma_fn(*ri, delta);
        }
    }
}

/// `H(w, z)` for the given design.
pub fn objective(x: &Matrix, y: &[f64], w: &[f64], z: &[f64], delta: f64) -> Result<f64> {
    check_shapes(x, y, w, z)?;
    Ok(objective_from_residual(&residual(x, y, w), z, delta))
}

/// `∇_w H(w, z)` with `|zᵢ|` held fixed.
pub fn grad_w(x: &Matrix, y: &[f64], w: &[f64], z: &[f64], delta: f64) -> Result<Vec<f64>> {
    check_shapes(x, y, w, z)?;
    let r = residual(x, y, w);
    let mut v = vec![0.0; r.len()];
    gradient_weights(&r, z, delta, &mut v);
    Ok(x.transpose_matvec(&v)?)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LoopParams {
    /// δ in the objective and the gradient step.
    pub delta_w: f64,
    /// δ in the z threshold.
    pub delta_z: f64,
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub record: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct LoopOutcome {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Option<SolveTrace>,
}

/// Iterates gradient-w / prox-z from `(w0, z0)` on an already preconditioned design.
pub(crate) fn run_loop(
    xp: &Matrix,
    y: &[f64],
    w0: Vec<f64>,
    z0: Vec<f64>,
    p: &LoopParams,
) -> LoopOutcome {
    let m = xp.rows();
    let mut w = w0;
    let mut z = z0;
    let mut r = residual(xp, y, &w);
    let mut h = objective_from_residual(&r, &z, p.delta_w);
    let mut trace = p.record.then(|| SolveTrace::new(h));
    let mut v = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < p.max_iter {
        gradient_weights(&r, &z, p.delta_w, &mut v);
        let g = xp.transpose_matvec(&v).expect("shape checked");
        let w_next: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - p.alpha * gi).collect();
        let r_next = residual(xp, y, &w_next);
        let z_next: Vec<f64> = r_next.iter().map(|&ri| prox_z(ri, p.delta_z)).collect();
        let h_next = objective_from_residual(&r_next, &z_next, p.delta_w);

        if let Some(t) = trace.as_mut() {
            t.objective_values.push(h_next);
            t.w_step_norms.push(linalg::dist2(&w_next, &w));
            t.z_step_norms.push(linalg::dist2(&z_next, &z));
            t.grad_norms.push(linalg::norm2(&g));
        }
        let decrement = h - h_next;
        w = w_next;
        z = z_next;
        r = r_next;
        h = h_next;
        iterations += 1;
        if decrement.abs() <= p.tol {
            converged = true;
            break;
        }
    }
    LoopOutcome {
        w,
        z,
        iterations,
        converged,
        trace,
    }
}

pub(crate) fn check_inputs(x: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::LengthMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.rows() < x.cols() {
        return Err(Error::Underdetermined {
            rows: x.rows(),
            cols: x.cols(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    Ok(())
}

/// Fits SARM from `w = 0, z = 0`.
pub fn sarm_fit(x: &Matrix, y: &[f64], config: &SarmConfig) -> Result<RegressionFit> {
    config.validate()?;
    check_inputs(x, y)?;
    let start = Instant::now();
    let pre = precondition(x)?;
    let mut fit = sarm_fit_preconditioned(&pre, y, config)?;
    fit.wall_time = start.elapsed().as_secs_f64();
    Ok(fit)
}

/// Same as [`sarm_fit`] but reuses an existing preconditioning.
pub fn sarm_fit_preconditioned(
    pre: &Preconditioned,
    y: &[f64],
    config: &SarmConfig,
) -> Result<RegressionFit> {
    config.validate()?;
    check_inputs(&pre.xp, y)?;
    let start = Instant::now();
    let (m, n) = pre.xp.shape();
    let out = run_loop(&pre.xp, y, vec![0.0; n], vec![0.0; m], &config.loop_params());
    let loop_time = start.elapsed().as_secs_f64();
    let w_hat = pre.to_original(&out.w)?;
    Ok(RegressionFit {
        w_hat,
        z_hat: out.z,
        iterations: out.iterations,
        converged: out.converged,
        trace: out.trace,
        wall_time: start.elapsed().as_secs_f64(),
        loop_time,
    })
}
