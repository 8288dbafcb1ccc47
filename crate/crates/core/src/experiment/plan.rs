use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Method, MethodSettings};
use crate::error::{Error, Result};
use crate::simgen::{ScenarioType, SimSpec};

/// Scenario geometry; the corruption rate and seed come from the plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(rename = "type")]
    pub type_id: ScenarioType,
    pub n: usize,
    /// Defaults to the scenario's standard row count.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub kappa: Option<f64>,
}

impl ScenarioSpec {
    pub fn sim_spec(&self, p: f64, seed: u64) -> SimSpec {
        SimSpec {
            type_id: self.type_id,
            m: self.m.unwrap_or_else(|| self.type_id.default_m()),
            n: self.n,
            p,
            kappa: self.kappa,
            seed,
        }
    }
}

/// A JSON-serializable experiment grid. Missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentPlan {
    pub scenarios: Vec<ScenarioSpec>,
    pub p_grid: Vec<f64>,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub base_seed: u64,
    pub delta_factor: f64,
    pub eta: f64,
    pub delta_pre_factor: f64,
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses the default pool.
    pub parallel: Option<usize>,
    pub record_traces: bool,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        let s = MethodSettings::default();
        Self {
            scenarios: Vec::new(),
            p_grid: vec![0.0],
            methods: vec![Method::Mlr, Method::Sarm],
            reps: 200,
            base_seed: 0,
            delta_factor: s.delta_factor,
            eta: s.eta,
            delta_pre_factor: s.delta_pre_factor,
            out_dir: None,
            parallel: None,
            record_traces: true,
        }
    }
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Self = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("reps must be >= 1".into()));
        }
        if self.scenarios.is_empty() {
            return Err(Error::InvalidConfig("plan has no scenarios".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("plan has no methods".into()));
        }
        if self.p_grid.is_empty() {
            return Err(Error::InvalidConfig("p_grid is empty".into()));
        }
        if self.delta_factor.is_nan()
            || self.delta_factor <= 0.0
            || self.delta_pre_factor.is_nan()
            || self.delta_pre_factor < 1.0
        {
            return Err(Error::InvalidConfig(
                "need delta_factor > 0 and delta_pre_factor >= 1".into(),
            ));
        }
        for spec in self.specs() {
            spec.validate()?;
        }
        Ok(())
    }

    /// Every (scenario, p) pair, seed left at `base_seed`.
    pub fn specs(&self) -> Vec<SimSpec> {
        self.scenarios
            .iter()
            .flat_map(|s| self.p_grid.iter().map(move |&p| s.sim_spec(p, self.base_seed)))
            .collect()
    }

    pub fn settings(&self) -> MethodSettings {
        MethodSettings {
            delta_factor: self.delta_factor,
            eta: self.eta,
            delta_pre_factor: self.delta_pre_factor,
            record_trace: self.record_traces,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_defaults_fill_in() {
        let plan = ExperimentPlan::from_json(
            r#"{"scenarios":[{"type":"T5","n":64,"kappa":16}],"p_grid":[0.1,0.3],"methods":["ipod","sarm"]}"#,
        )
        .unwrap();
        assert_eq!(plan.reps, 200);
        assert_eq!(plan.specs().len(), 2);
        assert_eq!(plan.specs()[0].m, 512);
        assert_eq!(plan.methods, vec![Method::Ipod, Method::Sarm]);
    }

    #[test]
    fn invalid_plans_rejected() {
        assert!(ExperimentPlan::from_json(r#"{"scenarios":[]}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"scenarios":[{"type":"T5","n":8}]}"#).is_err());
        assert!(ExperimentPlan::from_json(r#"{"scenarios":[{"type":"T1","n":8}],"reps":0}"#).is_err());
        assert!(ExperimentPlan::from_json("not json").is_err());
    }

    #[test]
    fn round_trip() {
        let plan = ExperimentPlan {
            scenarios: vec![ScenarioSpec {
                type_id: ScenarioType::T2,
                n: 50,
                m: None,
                kappa: None,
            }],
            ..ExperimentPlan::default()
        };
        let text = serde_json::to_string(&plan).unwrap();
        assert_eq!(ExperimentPlan::from_json(&text).unwrap(), plan);
    }
}
