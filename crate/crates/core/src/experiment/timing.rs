use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sarm::{precondition, sarm_fit_preconditioned, SarmConfig};
use crate::simgen::{generate, SimSpec};

/// Default cap on the estimated working set of one timing run.
pub const DEFAULT_MEMORY_BUDGET: usize = 4 << 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub scale: usize,
    pub m: usize,
    pub n: usize,
    pub iterations: usize,
    /// Best loop time over the repeats, seconds.
    pub loop_seconds: f64,
    pub per_iteration_seconds: f64,
    /// Per-iteration time over the previous row's.
    pub ratio_to_previous: Option<f64>,
    pub status: String,
}

/// Bytes for `X`, its preconditioned copy and one generator scratch copy.
fn working_set(m: usize, n: usize) -> usize {
    m.saturating_mul(n).saturating_mul(3 * std::mem::size_of::<f64>())
}

/// Times SARM at `m = scale · base.m` with `n` fixed. Each scale uses the
/// best of `repeats` runs of the iteration loop on one instance; scales
/// whose working set would exceed `memory_budget` produce a skipped row.
pub fn time_scaling_run(
    base: &SimSpec,
    scales: &[usize],
    repeats: usize,
    memory_budget: usize,
) -> Result<Vec<TimingRow>> {
    base.validate()?;
    let mut rows: Vec<TimingRow> = Vec::with_capacity(scales.len());
    let mut prev: Option<f64> = None;
    for &scale in scales {
        let m = base.m.saturating_mul(scale.max(1));
        let mut row = TimingRow {
            scale,
            m,
            n: base.n,
            iterations: 0,
            loop_seconds: 0.0,
            per_iteration_seconds: 0.0,
            ratio_to_previous: None,
            status: "ok".into(),
        };
        let need = working_set(m, base.n);
        if scale == 0 || need > memory_budget {
            row.status = if scale == 0 {
                "skipped: scale must be >= 1".into()
            } else {
                format!("skipped: needs {need} bytes, budget {memory_budget}")
            };
            rows.push(row);
            continue;
        }
        let inst = generate(&base.with_m(m))?;
        let pre = precondition(&inst.x)?;
        let cfg = SarmConfig::from_sigma(inst.sigma);
        let mut best = f64::INFINITY;
        for _ in 0..repeats.max(1) {
            let fit = sarm_fit_preconditioned(&pre, &inst.y, &cfg)?;
            row.iterations = fit.iterations;
            best = best.min(fit.loop_time);
        }
        row.loop_seconds = best;
        row.per_iteration_seconds = best / row.iterations.max(1) as f64;
        row.ratio_to_previous = prev.map(|p| row.per_iteration_seconds / p);
        prev = Some(row.per_iteration_seconds);
        rows.push(row);
    }
    Ok(rows)
}
