//! Empirical checks of the solver's convergence properties over recorded
//! traces, plus small brute-force oracles.

use serde::{Deserialize, Serialize};

use crate::baselines::fit_ols;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::random::{seeded_rng, uniform, Gaussian};
use crate::sarm::{grad_w, objective, SolveTrace};
use crate::smoothing::{prox_z, smooth_s};

pub const DESCENT_SLACK: f64 = 1e-10;
pub const ZSTEP_SLACK: f64 = 1e-9;
pub const TAIL_MIN_LEN: usize = 20;

/// Steps where the objective rose by more than [`DESCENT_SLACK`], counting
/// the step out of the starting point.
pub fn check_descent(trace: &SolveTrace) -> usize {
    trace
        .decrements()
        .iter()
        .filter(|&&d| d < -DESCENT_SLACK)
        .count()
}

/// Steps with `‖Δz‖₂ > 2‖Δw‖₂ + ZSTEP_SLACK`, from the recorded step norms.
///
/// The bound compares two prox outputs, `T(r(w^{k+1}))` and `T(r(w^k))`, so
/// the step out of the starting point is skipped: `z⁰` is an initial value,
/// not a prox of `w⁰`.
pub fn check_zstep_bound(trace: &SolveTrace) -> usize {
    trace
        .z_step_norms
        .iter()
        .zip(&trace.w_step_norms)
        .skip(1)
        .filter(|(dz, dw)| **dz > 2.0 * **dw + ZSTEP_SLACK)
        .count()
}

/// Same bound from raw iterate histories (`w⁰, w¹, …` and `z⁰, z¹, …`),
/// again skipping the step out of `(w⁰, z⁰)`.
pub fn check_zstep_bound_iterates(w_iterates: &[Vec<f64>], z_iterates: &[Vec<f64>]) -> usize {
    w_iterates
        .windows(2)
        .zip(z_iterates.windows(2))
        .skip(1)
        .filter(|(w, z)| linalg::dist2(&z[1], &z[0]) > 2.0 * linalg::dist2(&w[1], &w[0]) + ZSTEP_SLACK)
        .count()
}

/// Geometric mean of successive decrement ratios `d_{k+1}/d_k` over the
/// final third of the trace. Nonpositive decrements are skipped; a trace
/// with none left reports 0.
pub fn tail_ratio(trace: &SolveTrace) -> Result<f64> {
    if trace.len() < TAIL_MIN_LEN {
        return Err(Error::TooShort {
            len: trace.len(),
            required: TAIL_MIN_LEN,
        });
    }
    let d = trace.decrements();
    let tail = &d[d.len() - d.len() / 3..];
    let logs: Vec<f64> = tail
        .windows(2)
        .filter(|p| p[0] > 0.0 && p[1] > 0.0)
        .map(|p| (p[1] / p[0]).ln())
        .collect();
    if logs.is_empty() {
        return Ok(0.0);
    }
    Ok((logs.iter().sum::<f64>() / logs.len() as f64).exp())
}

/// Largest `‖∇_w H^{k+1}‖ / ‖[Δw_k; Δz_k]‖` over the trace; `None` when no
/// step moved.
pub fn subgradient_ratio(trace: &SolveTrace) -> Option<f64> {
    (0..trace.len().saturating_sub(1))
        .filter_map(|k| {
            let step = trace.w_step_norms[k].hypot(trace.z_step_norms[k]);
            (step > 0.0).then(|| trace.grad_norms[k + 1] / step)
        })
        .reduce(f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxCheck {
    /// How far the closed form's objective exceeds the best grid point.
    pub max_objective_gap: f64,
    /// Largest distance between the closed form and the refined numerical minimizer.
    pub max_value_diff: f64,
}

fn prox_objective(z: f64, r: f64, delta: f64) -> f64 {
    0.5 * (r - z) * (r - z) + delta * z.abs() / smooth_s(r, delta)
}

/// Compares [`prox_z`] with a 10⁴-point grid over `[−3|r|−1, 3|r|+1]`,
/// refined by golden-section search, on `samples` random `(r, δ)` pairs.
pub fn prox_oracle_check(samples: usize, seed: u64) -> ProxCheck {
    const GRID: usize = 10_000;
    let mut rng = seeded_rng(seed);
    let mut out = ProxCheck {
        max_objective_gap: 0.0,
        max_value_diff: 0.0,
    };
    for _ in 0..samples {
        let r = uniform(&mut rng, -20.0, 20.0);
        let delta = 10f64.powf(uniform(&mut rng, -3.0, 2.0));
        let f = |z: f64| prox_objective(z, r, delta);
        let lo = -3.0 * r.abs() - 1.0;
        let hi = 3.0 * r.abs() + 1.0;
        let step = (hi - lo) / GRID as f64;
        let (best_k, best) = (0..=GRID)
            .map(|k| (k, f(lo + step * k as f64)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let closed = prox_z(r, delta);
        out.max_objective_gap = out.max_objective_gap.max(f(closed) - best);
        // the objective is convex in z, so golden section on the bracketing cell converges
        let centre = lo + step * best_k as f64;
        let refined = golden_min(&f, centre - step, centre + step);
        out.max_value_diff = out.max_value_diff.max((refined - closed).abs());
    }
    out
}

fn golden_min(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) <= f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    0.5 * (lo + hi)
}

/// Worst relative error of [`grad_w`] against central differences
/// (`h = 1e-6`) over `instances` random problems with `m ≤ 50`, `n ≤ 8`.
pub fn fd_gradient_check(instances: usize, seed: u64) -> f64 {
    let mut rng = seeded_rng(seed);
    let mut g = Gaussian::new();
    let mut worst: f64 = 0.0;
    for t in 0..instances {
        let n = 1 + t % 8;
        let m = n + 2 + (t * 7) % (49 - n);
        let x = Matrix::from_fn(m, n, |_, _| g.sample(&mut rng));
        let y: Vec<f64> = (0..m).map(|_| 3.0 * g.sample(&mut rng)).collect();
        let w: Vec<f64> = (0..n).map(|_| g.sample(&mut rng)).collect();
        let z: Vec<f64> = (0..m)
            .map(|_| {
                let v = 2.0 * g.sample(&mut rng);
                if v.abs() > 1.5 {
                    v
                } else {
                    0.0
                }
            })
            .collect();
        let delta = 10f64.powf(uniform(&mut rng, -1.0, 1.0));
        let analytic = grad_w(&x, &y, &w, &z, delta).expect("shapes agree");
        let h = 1e-6;
        let fd: Vec<f64> = (0..n)
            .map(|j| {
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[j] += h;
                wm[j] -= h;
                let hp = objective(&x, &y, &wp, &z, delta).expect("shapes agree");
                let hm = objective(&x, &y, &wm, &z, delta).expect("shapes agree");
                (hp - hm) / (2.0 * h)
            })
            .collect();
        let err = linalg::dist2(&analytic, &fd) / linalg::norm2(&analytic).max(1e-8);
        worst = worst.max(err);
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceFit {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
}

/// Exhaustive search over `w` on a `resolution`-point-per-axis grid spanning
/// `±5‖w_OLS‖∞`, with `z` set to the proximal optimum for each `w`.
pub fn brute_force_small_fit(
    x: &Matrix,
    y: &[f64],
    delta: f64,
    resolution: usize,
) -> Result<BruteForceFit> {
    let (m, n) = x.shape();
    if n == 0 || n > 2 || m > 8 {
        return Err(Error::InvalidConfig(format!(
            "brute force needs n <= 2 and m <= 8, got {m}x{n}"
        )));
    }
    if resolution < 2 {
        return Err(Error::InvalidConfig("resolution must be >= 2".into()));
    }
    let ols = fit_ols(x, y)?;
    let span = 5.0 * ols.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let span = if span > 0.0 { span } else { 1.0 };
    let axis: Vec<f64> = (0..resolution)
        .map(|k| -span + 2.0 * span * k as f64 / (resolution - 1) as f64)
        .collect();
    let mut best = BruteForceFit {
        w: vec![0.0; n],
        z: vec![0.0; m],
        objective: f64::INFINITY,
    };
    let mut w = vec![0.0; n];
    let points = if n == 1 { resolution } else { resolution * resolution };
    for idx in 0..points {
        w[0] = axis[idx % resolution];
        if n == 2 {
            w[1] = axis[idx / resolution];
        }
        let z: Vec<f64> = (0..m)
            .map(|i| prox_z(y[i] - linalg::dot(x.row(i), &w), delta))
            .collect();
        let h = objective(x, y, &w, &z, delta)?;
        if h < best.objective {
            best = BruteForceFit {
                w: w.clone(),
                z,
                objective: h,
            };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub traces_checked: usize,
    pub descent_violations: usize,
    pub zstep_bound_violations: usize,
    pub max_fd_gradient_error: f64,
    /// Mean tail ratio over traces long enough to measure; 0 if none were.
    pub tail_convergence_ratio: f64,
    pub prox_oracle_max_gap: f64,
    /// Largest fitted constant `C` in `‖∇_w H^{k+1}‖ ≤ C‖[Δw; Δz]‖`.
    pub max_subgradient_ratio: f64,
}

/// Runs every trace check plus the gradient and prox oracles.
pub fn theory_report(
    traces: &[&SolveTrace],
    fd_instances: usize,
    prox_samples: usize,
    seed: u64,
) -> TheoryReport {
    let tails: Vec<f64> = traces.iter().filter_map(|t| tail_ratio(t).ok()).collect();
    TheoryReport {
        traces_checked: traces.len(),
        descent_violations: traces.iter().map(|t| check_descent(t)).sum(),
        zstep_bound_violations: traces.iter().map(|t| check_zstep_bound(t)).sum(),
        max_fd_gradient_error: fd_gradient_check(fd_instances, seed),
        tail_convergence_ratio: if tails.is_empty() {
            0.0
        } else {
            tails.iter().sum::<f64>() / tails.len() as f64
        },
        prox_oracle_max_gap: prox_oracle_check(prox_samples, seed.wrapping_add(1)).max_objective_gap,
        max_subgradient_ratio: traces
            .iter()
            .filter_map(|t| subgradient_ratio(t))
            .fold(0.0, f64::max),
    }
}
