//! End-to-end flows across modules: plans, traces, timing and the load pipeline.

use std::fs;

use robustfit::experiment::{
    export_trace, run_plan, time_scaling_run, ExperimentPlan, Method, ScenarioSpec, TRACE_HEADER,
};
use robustfit::loadcast::{
    apply_attack, read_csv, run_forecast_experiment, synthetic_table, write_csv, AttackKind, AttackSpec,
    ForecastMethod, ForecastOptions, LoadTable, SyntheticLoadSpec,
};
use robustfit::{generate, sarm_fit, Error, SarmConfig, ScenarioType, SimSpec};

fn small_plan(p_grid: Vec<f64>, methods: Vec<Method>, reps: usize) -> ExperimentPlan {
    ExperimentPlan {
        scenarios: vec![ScenarioSpec {
            type_id: ScenarioType::T1,
            n: 5,
            m: Some(150),
            kappa: None,
        }],
        p_grid,
        methods,
        reps,
        base_seed: 77,
        ..ExperimentPlan::default()
    }
}

#[test]
fn clean_plan_gives_noise_level_errors() {
    let out = run_plan(&small_plan(vec![0.0], vec![Method::Mlr, Method::Sarm], 1)).unwrap();
    assert_eq!(out.trials.len(), 2);
    for t in &out.trials {
        let e = t.error.unwrap();
        // σ is median(|Xw|)/16, so clean recovery sits well below 0.1
        assert!(e < 0.1, "{} {e}", t.method);
    }
}

#[test]
fn grid_summary_has_one_row_per_level_and_method() {
    let methods = vec![Method::Mlr, Method::Arosi, Method::Sarm];
    let out = run_plan(&small_plan(vec![0.1, 0.2, 0.3, 0.4, 0.5], methods.clone(), 2)).unwrap();
    assert_eq!(out.summary.len(), 5 * methods.len());
    assert_eq!(out.trials.len(), 5 * methods.len() * 2);
    let mut buf = Vec::new();
    out.write_summary_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 15);
}

#[test]
fn plan_outputs_land_on_disk_and_repeat_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = small_plan(vec![0.3], vec![Method::Tlrm, Method::Sarm], 3);
    run_plan(&plan).unwrap().write_dir(tmp.path().join("a")).unwrap();
    run_plan(&plan).unwrap().write_dir(tmp.path().join("b")).unwrap();
    for f in ["trials.csv", "summary.csv", "summary.json"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    assert!(tmp.path().join("a/timings.csv").is_file());
}

#[test]
fn plan_round_trips_through_json() {
    let plan = small_plan(vec![0.2], vec![Method::Gard, Method::Tssarm], 4);
    let text = serde_json::to_string(&plan).unwrap();
    assert_eq!(ExperimentPlan::from_json(&text).unwrap(), plan);
    let bad = text.replace("\"reps\":4", "\"reps\":0");
    assert!(ExperimentPlan::from_json(&bad).is_err());
}

#[test]
fn exported_trace_matches_fit() {
    let tmp = tempfile::tempdir().unwrap();
    let inst = generate(&SimSpec::new(ScenarioType::T1, 6, 0.3, 5).with_m(200)).unwrap();
    let fit = sarm_fit(&inst.x, &inst.y, &SarmConfig::from_sigma(inst.sigma).with_trace(true)).unwrap();
    let path = tmp.path().join("trace.csv");
    let rows = export_trace(&fit, &path).unwrap();
    assert_eq!(rows, fit.iterations);
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), TRACE_HEADER.join(","));
    let decrements: Vec<f64> = lines
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(decrements.len(), rows);
    assert!(decrements.iter().all(|&d| d >= 0.0));

    let untraced = sarm_fit(&inst.x, &inst.y, &SarmConfig::from_sigma(inst.sigma)).unwrap();
    assert!(matches!(export_trace(&untraced, tmp.path().join("x.csv")), Err(Error::NoTrace)));
}

#[test]
fn timing_rows_follow_scales() {
    let base = SimSpec::new(ScenarioType::T1, 8, 0.25, 3).with_m(300);
    let rows = time_scaling_run(&base, &[1], 1, usize::MAX).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].ratio_to_previous.is_none());
    let rows = time_scaling_run(&base, &[1, 1 << 40], 1, 1 << 30).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].status.starts_with("skipped"));
}

fn two_years() -> LoadTable {
    synthetic_table(&SyntheticLoadSpec::years(2, 31))
}

#[test]
fn load_csv_round_trip_is_exact() {
    let table = two_years();
    let mut buf = Vec::new();
    write_csv(&table, &mut buf).unwrap();
    let back = read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.len(), table.len());
    for (a, b) in table.records().iter().zip(back.records()) {
        assert_eq!(a.timestamp, b.timestamp);
        assert_eq!(a.load, b.load);
        assert_eq!(a.temperature, b.temperature);
    }
}

#[test]
fn clean_forecast_methods_agree_and_attack_hurts_mlr() {
    let table = two_years();
    let cut = table.records()[table.len() / 2].timestamp;
    let (train, test) = table.split_at(cut);
    let opts = ForecastOptions::default();
    let mlr = run_forecast_experiment(&train, &test, None, ForecastMethod::Mlr, &opts).unwrap();
    let ts = run_forecast_experiment(&train, &test, None, ForecastMethod::Tssarm, &opts).unwrap();
    assert_eq!(mlr.features, 285);
    assert!((mlr.mape - ts.mape).abs() <= 0.5, "{} vs {}", mlr.mape, ts.mape);

    let attack = AttackSpec::new(AttackKind::PosUniform, 40.0, 9);
    let hit = apply_attack(&train, &attack).unwrap();
    assert_eq!(hit.mask.len(), attack.count(train.len()));
    let mlr_a = run_forecast_experiment(&train, &test, Some(&attack), ForecastMethod::Mlr, &opts).unwrap();
    let ts_a = run_forecast_experiment(&train, &test, Some(&attack), ForecastMethod::Tssarm, &opts).unwrap();
    assert!(mlr_a.mape > mlr.mape);
    assert!(ts_a.mape < mlr_a.mape, "{} vs {}", ts_a.mape, mlr_a.mape);
}
