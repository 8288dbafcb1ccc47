//! Monte Carlo experiment grids over generated scenarios.
//!
//! A plan expands into cells (scenario × corruption rate × repetition). Rep
//! `r` of every cell uses seed `base_seed + r`, and every method in a cell
//! sees the same instance. Results are sorted before writing, so output files
//! do not depend on scheduling; wall-clock times go to a separate file.

mod parallel;
mod plan;
mod timing;
mod trace;

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    fit_arosi, fit_gard, fit_ideal, fit_ipod, fit_irls_bisquare, fit_lad, fit_ols, fit_oracle,
    fit_tlrm, BaselineConfig,
};
use crate::diagnostics::{check_descent, check_zstep_bound};
use crate::error::{Error, Result};
use crate::sarm::{sarm_fit, SarmConfig, SolveTrace};
use crate::simgen::{generate, relative_l2_error, ScenarioType, SimInstance, SimSpec};
use crate::stats::{mean, std_dev};
use crate::tssarm::{tssarm_fit, TssarmConfig};

pub use parallel::{map_trials, map_trials_seq, parallel_enabled, with_threads};
pub use plan::{ExperimentPlan, ScenarioSpec};
pub use timing::{time_scaling_run, TimingRow, DEFAULT_MEMORY_BUDGET};
pub use trace::{export_trace, write_trace, TRACE_HEADER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ideal,
    Oracle,
    Mlr,
    Irls,
    L1,
    Tlrm,
    Arosi,
    Ipod,
    Gard,
    Sarm,
    Tssarm,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Self::Ideal,
        Self::Oracle,
        Self::Mlr,
        Self::Irls,
        Self::L1,
        Self::Tlrm,
        Self::Arosi,
        Self::Ipod,
        Self::Gard,
        Self::Sarm,
        Self::Tssarm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ideal => "ideal",
            Self::Oracle => "oracle",
            Self::Mlr => "mlr",
            Self::Irls => "irls",
            Self::L1 => "l1",
            Self::Tlrm => "tlrm",
            Self::Arosi => "arosi",
            Self::Ipod => "ipod",
            Self::Gard => "gard",
            Self::Sarm => "sarm",
            Self::Tssarm => "tssarm",
        }
    }

    /// Parses a comma-separated list such as `"mlr,sarm,tssarm"`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let alias = match t.as_str() {
            "ols" => "mlr",
            "lad" => "l1",
            "trlm" => "tlrm",
            other => other,
        };
        Method::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method {s:?}")))
    }
}

/// Solver settings shared by every trial of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSettings {
    pub delta_factor: f64,
    pub eta: f64,
    pub delta_pre_factor: f64,
    pub record_trace: bool,
}

impl Default for MethodSettings {
    fn default() -> Self {
        Self {
            delta_factor: crate::sarm::DEFAULT_DELTA_FACTOR,
            eta: crate::tssarm::DEFAULT_ETA,
            delta_pre_factor: crate::tssarm::DEFAULT_DELTA_PRE_FACTOR,
            record_trace: false,
        }
    }
}

impl MethodSettings {
    pub fn sarm_config(&self, sigma: f64) -> SarmConfig {
        SarmConfig::new(self.delta_factor * sigma * sigma).with_trace(self.record_trace)
    }

    pub fn tssarm_config(&self, sigma: f64) -> TssarmConfig {
        let base = self.sarm_config(sigma);
        TssarmConfig {
            eta: self.eta,
            delta_pre: self.delta_pre_factor * base.delta,
            ..TssarmConfig::new(base)
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub w_hat: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Option<SolveTrace>,
    pub seconds: f64,
}

/// Fits one method on a generated instance. Methods that need the noise
/// level or the corruption get them from the instance.
pub fn run_method(method: Method, inst: &SimInstance, settings: &MethodSettings) -> Result<MethodOutcome> {
    let start = Instant::now();
    let cfg = BaselineConfig::with_sigma(inst.sigma);
    let direct = |w: Vec<f64>| (w, 1, true, None);
    let (w_hat, iterations, converged, trace) = match method {
        Method::Ideal => direct(fit_ideal(&inst.x, &inst.y, &inst.z_true)?),
        Method::Oracle => direct(fit_oracle(&inst.x, &inst.y, &inst.support())?),
        Method::Mlr => direct(fit_ols(&inst.x, &inst.y)?),
        Method::Irls | Method::L1 | Method::Tlrm | Method::Arosi | Method::Ipod | Method::Gard => {
            let fit = match method {
                Method::Irls => fit_irls_bisquare(&inst.x, &inst.y, &cfg)?,
                Method::L1 => fit_lad(&inst.x, &inst.y, &cfg)?,
                Method::Tlrm => fit_tlrm(&inst.x, &inst.y, &cfg)?,
                Method::Arosi => fit_arosi(&inst.x, &inst.y, &cfg)?,
                Method::Ipod => fit_ipod(&inst.x, &inst.y, &cfg)?,
                _ => fit_gard(&inst.x, &inst.y, &cfg)?,
            };
            (fit.w, fit.iterations, fit.converged, None)
        }
        Method::Sarm => {
            let fit = sarm_fit(&inst.x, &inst.y, &settings.sarm_config(inst.sigma))?;
            (fit.w_hat, fit.iterations, fit.converged, fit.trace)
        }
        Method::Tssarm => {
            let fit = tssarm_fit(&inst.x, &inst.y, &settings.tssarm_config(inst.sigma))?;
            (fit.w_hat, fit.iterations, fit.converged, fit.trace)
        }
    };
    Ok(MethodOutcome {
        w_hat,
        iterations,
        converged,
        trace,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Deterministic per-trial outcome (no timings).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub scenario: ScenarioType,
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub kappa: Option<f64>,
    pub rep: usize,
    pub seed: u64,
    pub method: Method,
    pub error: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective increases in the recorded trace (iterative SARM methods only).
    pub descent_violations: Option<usize>,
    pub zstep_violations: Option<usize>,
    /// `ok` or the failure message.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub scenario: ScenarioType,
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub rep: usize,
    pub method: Method,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: ScenarioType,
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub kappa: Option<f64>,
    pub method: Method,
    pub trials: usize,
    pub failed: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PlanOutput {
    pub trials: Vec<TrialRecord>,
    pub timings: Vec<TimingRecord>,
    pub summary: Vec<SummaryRow>,
}

impl PlanOutput {
    pub fn mean_error(&self, scenario: ScenarioType, p: f64, method: Method) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.scenario == scenario && r.p == p && r.method == method)
            .map(|r| r.mean_error)
    }

    pub fn total_descent_violations(&self) -> usize {
        self.trials.iter().filter_map(|t| t.descent_violations).sum()
    }

    pub fn total_zstep_violations(&self) -> usize {
        self.trials.iter().filter_map(|t| t.zstep_violations).sum()
    }

    pub fn failures(&self) -> usize {
        self.trials.iter().filter(|t| t.status != "ok").count()
    }

    pub fn write_trials_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "scenario",
            "m",
            "n",
            "p",
            "kappa",
            "rep",
            "seed",
            "method",
            "error",
            "iterations",
            "converged",
            "descent_violations",
            "zstep_violations",
            "status",
        ])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for t in &self.trials {
            w.write_record([
                t.scenario.to_string(),
                t.m.to_string(),
                t.n.to_string(),
                t.p.to_string(),
                opt(t.kappa.map(|k| k.to_string())),
                t.rep.to_string(),
                t.seed.to_string(),
                t.method.to_string(),
                opt(t.error.map(|e| format!("{e:e}"))),
                t.iterations.to_string(),
                t.converged.to_string(),
                opt(t.descent_violations.map(|v| v.to_string())),
                opt(t.zstep_violations.map(|v| v.to_string())),
                t.status.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "scenario",
            "m",
            "n",
            "p",
            "kappa",
            "method",
            "trials",
            "failed",
            "mean_error",
            "std_error",
            "mean_iterations",
        ])?;
        for r in &self.summary {
            w.write_record([
                r.scenario.to_string(),
                r.m.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.kappa.map(|k| k.to_string()).unwrap_or_default(),
                r.method.to_string(),
                r.trials.to_string(),
                r.failed.to_string(),
                format!("{:e}", r.mean_error),
                format!("{:e}", r.std_error),
                r.mean_iterations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_timings_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["scenario", "m", "n", "p", "rep", "method", "seconds"])?;
        for t in &self.timings {
            w.write_record([
                t.scenario.to_string(),
                t.m.to_string(),
                t.n.to_string(),
                t.p.to_string(),
                t.rep.to_string(),
                t.method.to_string(),
                t.seconds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `trials.csv`, `summary.csv`, `summary.json` and `timings.csv`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_trials_csv(std::fs::File::create(dir.join("trials.csv"))?)?;
        self.write_summary_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
        serde_json::to_writer_pretty(std::fs::File::create(dir.join("summary.json"))?, &self.summary)?;
        self.write_timings_csv(std::fs::File::create(dir.join("timings.csv"))?)?;
        Ok(())
    }
}

struct Cell {
    spec: SimSpec,
    rep: usize,
}

fn run_cell(cell: &Cell, methods: &[Method], settings: &MethodSettings) -> Vec<(TrialRecord, TimingRecord)> {
    let spec = &cell.spec;
    let record = |method: Method| TrialRecord {
        scenario: spec.type_id,
        m: spec.m,
        n: spec.n,
        p: spec.p,
        kappa: spec.kappa,
        rep: cell.rep,
        seed: spec.seed,
        method,
        error: None,
        iterations: 0,
        converged: false,
        descent_violations: None,
        zstep_violations: None,
        status: String::new(),
    };
    let timing = |method: Method, seconds: f64| TimingRecord {
        scenario: spec.type_id,
        m: spec.m,
        n: spec.n,
        p: spec.p,
        rep: cell.rep,
        method,
        seconds,
    };
    let inst = match generate(spec) {
        Ok(i) => i,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| {
                    let mut r = record(m);
                    r.status = format!("generate failed: {e}");
                    (r, timing(m, 0.0))
                })
                .collect()
        }
    };
    methods
        .iter()
        .map(|&method| {
            let mut r = record(method);
            let outcome = run_method(method, &inst, settings)
                .and_then(|o| relative_l2_error(&o.w_hat, &inst.w_true).map(|e| (o, e)));
            match outcome {
                Ok((o, err)) => {
                    r.error = Some(err);
                    r.iterations = o.iterations;
                    r.converged = o.converged;
                    if let Some(t) = &o.trace {
                        r.descent_violations = Some(check_descent(t));
                        r.zstep_violations = Some(check_zstep_bound(t));
                    }
                    r.status = "ok".into();
                    (r, timing(method, o.seconds))
                }
                Err(e) => {
                    r.status = e.to_string();
                    (r, timing(method, 0.0))
                }
            }
        })
        .collect()
}

fn summarize(trials: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut i = 0;
    while i < trials.len() {
        let head = &trials[i];
        let same = |t: &TrialRecord| {
            t.scenario == head.scenario
                && t.m == head.m
                && t.n == head.n
                && t.p == head.p
                && t.kappa == head.kappa
                && t.method == head.method
        };
        let j = i + trials[i..].iter().take_while(|t| same(t)).count();
        let group = &trials[i..j];
        let errors: Vec<f64> = group.iter().filter_map(|t| t.error).collect();
        let iters: Vec<f64> = group
            .iter()
            .filter(|t| t.error.is_some())
            .map(|t| t.iterations as f64)
            .collect();
        rows.push(SummaryRow {
            scenario: head.scenario,
            m: head.m,
            n: head.n,
            p: head.p,
            kappa: head.kappa,
            method: head.method,
            trials: group.len(),
            failed: group.len() - errors.len(),
            mean_error: mean(&errors),
            std_error: std_dev(&errors),
            mean_iterations: mean(&iters),
        });
        i = j;
    }
    rows
}

fn sort_key(t: &TrialRecord) -> (ScenarioType, usize, usize, u64, u64, Method, usize) {
    (
        t.scenario,
        t.m,
        t.n,
        t.p.to_bits(),
        t.kappa.map_or(0, f64::to_bits),
        t.method,
        t.rep,
    )
}

/// Runs every cell of the plan, in parallel when enabled.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanOutput> {
    plan.validate()?;
    let cells: Vec<Cell> = plan
        .specs()
        .into_iter()
        .flat_map(|spec| {
            (0..plan.reps).map(move |rep| Cell {
                spec: spec.with_seed(plan.base_seed.wrapping_add(rep as u64)),
                rep,
            })
        })
        .collect();
    let settings = plan.settings();
    let results = with_threads(plan.parallel, || {
        map_trials(&cells, |cell| run_cell(cell, &plan.methods, &settings))
    });
    let (mut trials, mut timings): (Vec<_>, Vec<_>) = results.into_iter().flatten().unzip();
    // p and kappa are finite and nonnegative, so bit order matches numeric order
    trials.sort_by_key(sort_key);
    timings.sort_by_key(|t: &TimingRecord| (t.scenario, t.m, t.n, t.p.to_bits(), t.method, t.rep));
    let summary = summarize(&trials);
    Ok(PlanOutput {
        trials,
        timings,
        summary,
    })
}
