use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use robustfit::diagnostics::{theory_report, TheoryReport};
use robustfit::experiment::{
    export_trace, map_trials, run_plan, time_scaling_run, with_threads, ExperimentPlan, Method, ScenarioSpec,
    DEFAULT_MEMORY_BUDGET,
};
use robustfit::loadcast::{
    ingest_csv, run_forecast_experiment, synthetic_table, AttackKind, AttackSpec, ForecastMethod,
    ForecastOptions, ForecastReport, LoadTable, SyntheticLoadSpec,
};
use robustfit::sarm::SarmConfig;
use robustfit::tssarm::{tssarm_fit, TssarmConfig};
use robustfit::{generate, relative_l2_error, sarm_fit, RegressionFit, ScenarioType, SimSpec};

use crate::{ForecastArgs, GlobalOpts, ScenarioArgs, SimulateArgs, SpecFormat, TimingArgs, TraceArgs, VerifyArgs};

const DEFAULT_OUT: &str = "robustfit-out";
const THREADS_ENV: &str = "ROBUSTFIT_THREADS";

/// Flag, then config, then `ROBUSTFIT_THREADS`.
fn threads(g: &GlobalOpts, from_config: Option<usize>) -> Result<Option<usize>> {
    if let Some(k) = g.parallel.or(from_config) {
        return Ok(Some(k));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            let k = v.trim().parse().with_context(|| format!("{THREADS_ENV}={v:?} is not a count"))?;
            Ok(Some(k))
        }
        _ => Ok(None),
    }
}

fn out_dir(g: &GlobalOpts, from_config: Option<&Path>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn parse_floats(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("bad number {t:?}")))
        .collect()
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

/// Reads a SimSpec written either as JSON or as `key = value` lines.
pub fn read_spec(path: &Path) -> Result<SimSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec = if text.trim_start().starts_with('{') {
        let spec: SimSpec = serde_json::from_str(&text)?;
        spec.validate()?;
        spec
    } else {
        SimSpec::from_kv(&text)?
    };
    Ok(spec)
}

fn scenario_spec(g: &GlobalOpts, a: &ScenarioArgs) -> Result<SimSpec> {
    let mut spec = match &a.spec {
        Some(path) => read_spec(path)?,
        None => {
            let type_id: ScenarioType = a.type_id.parse()?;
            SimSpec {
                type_id,
                m: a.m.unwrap_or_else(|| type_id.default_m()),
                n: a.n,
                p: a.p,
                kappa: a.kappa,
                seed: 0,
            }
        }
    };
    if let Some(seed) = g.seed {
        spec.seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

/// Plan from `--config` (if any) with the scenario and global flags on top.
fn build_plan(g: &GlobalOpts, scenario: &ScenarioArgs, p_grid: Option<&str>) -> Result<ExperimentPlan> {
    let mut plan = match &g.config {
        Some(path) => ExperimentPlan::load(path).with_context(|| format!("loading plan {}", path.display()))?,
        None => ExperimentPlan::default(),
    };
    if plan.scenarios.is_empty() || scenario.spec.is_some() {
        let spec = scenario_spec(g, scenario)?;
        plan.scenarios = vec![ScenarioSpec {
            type_id: spec.type_id,
            n: spec.n,
            m: Some(spec.m),
            kappa: spec.kappa,
        }];
        plan.p_grid = vec![spec.p];
        if scenario.spec.is_some() {
            plan.base_seed = spec.seed;
        }
    }
    if let Some(list) = p_grid {
        plan.p_grid = parse_floats(list)?;
    }
    if let Some(seed) = g.seed {
        plan.base_seed = seed;
    }
    if let Some(reps) = g.reps {
        plan.reps = reps;
    }
    if let Some(list) = &g.methods {
        plan.methods = Method::parse_list(list)?;
    }
    if let Some(out) = &g.out {
        plan.out_dir = Some(out.clone());
    }
    plan.parallel = threads(g, plan.parallel)?;
    Ok(plan)
}

pub fn simulate(g: &GlobalOpts, a: &SimulateArgs) -> Result<()> {
    let mut plan = build_plan(g, &a.scenario, a.p_grid.as_deref())?;
    if g.config.is_none() && g.reps.is_none() {
        // desk-scale default; a config or --reps asks for more
        plan.reps = 20;
    }
    if let Some(f) = a.delta_factor {
        plan.delta_factor = f;
    }
    plan.validate()?;
    if a.dry_run {
        let specs = plan.specs();
        match a.format {
            SpecFormat::Kv => {
                let blocks: Vec<String> = specs.iter().map(SimSpec::to_kv).collect();
                emit(&blocks.join("\n"))?;
            }
            SpecFormat::Json => print_json(&specs)?,
        }
        return Ok(());
    }
    let out = run_plan(&plan)?;
    let dir = out_dir(g, plan.out_dir.as_deref());
    out.write_dir(&dir)?;
    print_json(&out.summary)?;
    eprintln!(
        "{} trials ({} failed) written to {}",
        out.trials.len(),
        out.failures(),
        dir.display()
    );
    Ok(())
}

/// Forecast settings; every field has a default and a matching flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    pub input: Option<PathBuf>,
    pub years: u32,
    pub seed: u64,
    pub train_fraction: f64,
    pub methods: Vec<ForecastMethod>,
    pub attack: Option<AttackSpec>,
    pub options: ForecastOptions,
    pub out_dir: Option<PathBuf>,
    pub parallel: Option<usize>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            input: None,
            years: 3,
            seed: 0,
            train_fraction: 2.0 / 3.0,
            methods: vec![ForecastMethod::Mlr, ForecastMethod::Sarm, ForecastMethod::Tssarm],
            attack: None,
            options: ForecastOptions::default(),
            out_dir: None,
            parallel: None,
        }
    }
}

/// Flat CSV view of a [`ForecastReport`].
#[derive(Debug, Serialize)]
struct ForecastRow {
    method: ForecastMethod,
    attack: String,
    fraction_k: Option<f64>,
    param_a: Option<f64>,
    param_b: Option<f64>,
    mape: f64,
    sigma_hat: f64,
    delta: f64,
    iterations: usize,
    converged: bool,
    features: usize,
    train_rows: usize,
    test_rows: usize,
    q: usize,
}

impl From<&ForecastReport> for ForecastRow {
    fn from(r: &ForecastReport) -> Self {
        Self {
            method: r.method,
            attack: r.attack.map_or_else(|| "none".to_string(), |a| a.kind.to_string()),
            fraction_k: r.attack.map(|a| a.fraction_k),
            param_a: r.attack.map(|a| a.params.0),
            param_b: r.attack.map(|a| a.params.1),
            mape: r.mape,
            sigma_hat: r.sigma_hat,
            delta: r.delta,
            iterations: r.iterations,
            converged: r.converged,
            features: r.features,
            train_rows: r.train_rows,
            test_rows: r.test_rows,
            q: r.q,
        }
    }
}

fn forecast_config(g: &GlobalOpts, a: &ForecastArgs) -> Result<ForecastConfig> {
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ForecastConfig::default(),
    };
    if let Some(input) = &a.input {
        cfg.input = Some(input.clone());
    }
    if let Some(y) = a.years {
        cfg.years = y;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(f) = a.train_fraction {
        cfg.train_fraction = f;
    }
    if let Some(list) = &g.methods {
        cfg.methods = list
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<_, _>>()?;
    }
    if let Some(kind) = &a.attack {
        let kind: AttackKind = kind.parse()?;
        let fraction = a.fraction.or(cfg.attack.map(|s| s.fraction_k)).unwrap_or(40.0);
        cfg.attack = Some(AttackSpec::new(kind, fraction, cfg.seed.wrapping_add(1)));
    } else if let (Some(f), Some(spec)) = (a.fraction, cfg.attack.as_mut()) {
        spec.fraction_k = f;
    }
    if let Some(p) = &a.params {
        let v = parse_floats(p)?;
        let [x, y] = v[..] else {
            bail!("--params needs two numbers, got {p:?}");
        };
        match cfg.attack.as_mut() {
            Some(spec) => spec.params = (x, y),
            None => bail!("--params given without an attack"),
        }
    }
    if let Some(f) = a.delta_factor {
        cfg.options.delta_factor = f;
    }
    cfg.out_dir = g.out.clone().or(cfg.out_dir);
    cfg.parallel = threads(g, cfg.parallel)?;
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        bail!("train_fraction must lie in (0, 1), got {}", cfg.train_fraction);
    }
    if cfg.methods.is_empty() {
        bail!("no forecast methods selected");
    }
    if let Some(spec) = &cfg.attack {
        spec.validate()?;
    }
    Ok(cfg)
}

/// Splits at the first timestamp past the training share of rows.
fn split(table: &LoadTable, fraction: f64) -> Result<(LoadTable, LoadTable)> {
    let k = (table.len() as f64 * fraction).round() as usize;
    if k == 0 || k >= table.len() {
        bail!("train_fraction {fraction} leaves an empty split of {} rows", table.len());
    }
    Ok(table.split_at(table.records()[k].timestamp))
}

pub fn forecast(g: &GlobalOpts, a: &ForecastArgs) -> Result<()> {
    let cfg = forecast_config(g, a)?;
    let table = match &cfg.input {
        Some(path) => ingest_csv(path).with_context(|| format!("reading {}", path.display()))?,
        None => synthetic_table(&SyntheticLoadSpec::years(cfg.years, cfg.seed)),
    };
    let (train, test) = split(&table, cfg.train_fraction)?;
    let results = with_threads(cfg.parallel, || {
        map_trials(&cfg.methods, |&m| {
            run_forecast_experiment(&train, &test, cfg.attack.as_ref(), m, &cfg.options)
        })
    });
    let reports = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let dir = out_dir(g, cfg.out_dir.as_deref());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("forecast.csv"))?;
    for r in &reports {
        w.serialize(ForecastRow::from(r))?;
    }
    w.flush()?;
    write_json(&dir.join("forecast.json"), &reports)?;
    print_json(&reports)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct TraceSummary {
    spec: SimSpec,
    method: Method,
    iterations: usize,
    converged: bool,
    relative_error: f64,
    rows: usize,
    path: PathBuf,
}

fn fit_with_trace(method: Method, spec: &SimSpec, delta_factor: f64) -> Result<(RegressionFit, f64)> {
    let inst = generate(spec)?;
    let base = SarmConfig::new(delta_factor * inst.sigma * inst.sigma).with_trace(true);
    let fit = match method {
        Method::Sarm => sarm_fit(&inst.x, &inst.y, &base)?,
        Method::Tssarm => tssarm_fit(&inst.x, &inst.y, &TssarmConfig::new(base))?,
        other => bail!("method {other} has no iteration trace; use sarm or tssarm"),
    };
    let err = relative_l2_error(&fit.w_hat, &inst.w_true)?;
    Ok((fit, err))
}

pub fn trace(g: &GlobalOpts, a: &TraceArgs) -> Result<()> {
    let spec = scenario_spec(g, &a.scenario)?;
    let method: Method = a.method.parse()?;
    let (fit, err) = fit_with_trace(method, &spec, a.delta_factor.unwrap_or(6.0))?;
    let path = match &g.out {
        Some(p) if p.is_dir() => p.join("trace.csv"),
        Some(p) => p.clone(),
        None => PathBuf::from("trace.csv"),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    let rows = export_trace(&fit, &path)?;
    print_json(&TraceSummary {
        spec,
        method,
        iterations: fit.iterations,
        converged: fit.converged,
        relative_error: err,
        rows,
        path,
    })
}

pub fn timing(g: &GlobalOpts, a: &TimingArgs) -> Result<()> {
    let spec = scenario_spec(g, &a.scenario)?;
    let scales: Vec<usize> = a
        .scales
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().with_context(|| format!("bad scale {t:?}")))
        .collect::<Result<_>>()?;
    if scales.is_empty() {
        bail!("no scales given");
    }
    let rows = time_scaling_run(
        &spec,
        &scales,
        a.repeats.max(1),
        a.memory_budget.unwrap_or(DEFAULT_MEMORY_BUDGET),
    )?;
    let dir = out_dir(g, None);
    fs::create_dir_all(&dir)?;
    let mut w = csv::Writer::from_path(dir.join("timing.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    print_json(&rows)
}

pub fn verify(g: &GlobalOpts, a: &VerifyArgs) -> Result<()> {
    let mut plan = build_plan(g, &a.scenario, None)?;
    if g.config.is_none() && g.reps.is_none() {
        plan.reps = 20;
    }
    if g.methods.is_none() {
        plan.methods = vec![Method::Sarm, Method::Tssarm];
    }
    plan.validate()?;
    let jobs: Vec<(Method, SimSpec)> = plan
        .specs()
        .into_iter()
        .flat_map(|spec| (0..plan.reps).map(move |r| spec.with_seed(spec.seed.wrapping_add(r as u64))))
        .flat_map(|spec| plan.methods.iter().map(move |&m| (m, spec)))
        .collect();
    let delta_factor = plan.delta_factor;
    let fits = with_threads(plan.parallel, || {
        map_trials(&jobs, |(m, spec)| fit_with_trace(*m, spec, delta_factor))
    });
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let traces: Vec<_> = fits.iter().filter_map(|(f, _)| f.trace.as_ref()).collect();
    let report: TheoryReport = theory_report(&traces, a.fd_instances, a.prox_samples, plan.base_seed);

    let dir = out_dir(g, plan.out_dir.as_deref());
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("theory_report.json"), &report)?;
    print_json(&report)?;
    if report.descent_violations > 0 || report.zstep_bound_violations > 0 {
        bail!(
            "{} descent and {} z-step violations",
            report.descent_violations,
            report.zstep_bound_violations
        );
    }
    Ok(())
}
