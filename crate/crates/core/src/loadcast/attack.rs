//! Multiplicative tampering of a random subset of training loads.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{LoadError, LoadTable};
use crate::random::{sample_indices, seeded_rng, uniform, Gaussian};

/// Attacked loads are scaled by `1 ± p/100` with `p` drawn per row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// `1 + p/100`, `p ~ U(a, b)`.
    PosUniform,
    /// `1 + p/100`, `p ~ N(μ, σ²)`.
    PosGaussian,
    /// `1 − p/100`, `p ~ U(a, b)` capped at 99 so the load stays positive.
    NegUniform,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PosUniform => "pos_uniform",
            Self::PosGaussian => "pos_gaussian",
            Self::NegUniform => "neg_uniform",
        })
    }
}

impl std::str::FromStr for AttackKind {
    type Err = LoadError;

    fn from_str(s: &str) -> Result<Self, LoadError> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pos_uniform" | "posuniform" => Ok(Self::PosUniform),
            "pos_gaussian" | "posgaussian" => Ok(Self::PosGaussian),
            "neg_uniform" | "neguniform" => Ok(Self::NegUniform),
            other => Err(LoadError::InvalidSpec(format!("unknown attack kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AttackTarget {
    #[default]
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    /// Percent of rows attacked.
    pub fraction_k: f64,
    /// `(a, b)` for the uniform kinds, `(μ, σ)` for the Gaussian kind, in percent.
    pub params: (f64, f64),
    pub seed: u64,
    #[serde(default)]
    pub target: AttackTarget,
}

impl AttackSpec {
    /// Defaults: U(20, 50) for the uniform kinds, N(30, 10²) for the Gaussian one.
    pub fn new(kind: AttackKind, fraction_k: f64, seed: u64) -> Self {
        let params = match kind {
            AttackKind::PosGaussian => (30.0, 10.0),
            _ => (20.0, 50.0),
        };
        Self {
            kind,
            fraction_k,
            params,
            seed,
            target: AttackTarget::Train,
        }
    }

    pub fn validate(&self) -> Result<(), LoadError> {
        if self.target == AttackTarget::Test {
            return Err(LoadError::InvalidSpec("attacks apply to training data only".into()));
        }
        if !(0.0..=100.0).contains(&self.fraction_k) {
            return Err(LoadError::InvalidSpec(format!(
                "fraction_k must lie in [0, 100], got {}",
                self.fraction_k
            )));
        }
        let (a, b) = self.params;
        if !(a.is_finite() && b.is_finite()) {
            return Err(LoadError::InvalidSpec("magnitude parameters must be finite".into()));
        }
        match self.kind {
            AttackKind::PosGaussian if b < 0.0 => {
                Err(LoadError::InvalidSpec(format!("sigma must be >= 0, got {b}")))
            }
            AttackKind::PosUniform | AttackKind::NegUniform if a > b => {
                Err(LoadError::InvalidSpec(format!("need a <= b, got ({a}, {b})")))
            }
            _ => Ok(()),
        }
    }

    /// Rows attacked out of `rows`: `round(k% · rows)`.
    pub fn count(&self, rows: usize) -> usize {
        (self.fraction_k / 100.0 * rows as f64).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub table: LoadTable,
    /// Attacked rows, ascending.
    pub mask: Vec<usize>,
    /// Multiplier applied to each masked row, aligned with `mask`.
    pub factors: Vec<f64>,
}

pub fn apply_attack(table: &LoadTable, spec: &AttackSpec) -> Result<AttackOutcome, LoadError> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let mut g = Gaussian::new();
    let mask = sample_indices(&mut rng, table.len(), spec.count(table.len()));
    let (a, b) = spec.params;
    let factors: Vec<f64> = mask
        .iter()
        .map(|_| match spec.kind {
            AttackKind::PosUniform => 1.0 + uniform(&mut rng, a, b) / 100.0,
            // keep the factor positive even for far-left Gaussian draws
            AttackKind::PosGaussian => 1.0 + g.sample_with(&mut rng, a, b).max(-99.0) / 100.0,
            AttackKind::NegUniform => 1.0 - uniform(&mut rng, a, b).min(99.0) / 100.0,
        })
        .collect();
    let mut loads = table.loads();
    for (&i, &f) in mask.iter().zip(&factors) {
        loads[i] *= f;
    }
    Ok(AttackOutcome {
        table: table.with_loads(&loads),
        mask,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loadcast::{synthetic_table, SyntheticLoadSpec};

    fn table() -> LoadTable {
        let t = synthetic_table(&SyntheticLoadSpec::years(1, 1));
        LoadTable::new(t.records()[..1000].to_vec()).unwrap()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let t = table();
        let out = apply_attack(&t, &AttackSpec::new(AttackKind::PosUniform, 0.0, 1)).unwrap();
        assert_eq!(out.table, t);
        assert!(out.mask.is_empty());
    }

    #[test]
    fn point_mass_uniform_scales_by_exactly_one_and_a_half() {
        let t = LoadTable::new(table().records()[..1].to_vec()).unwrap();
        let mut spec = AttackSpec::new(AttackKind::PosUniform, 100.0, 2);
        spec.params = (50.0, 50.0);
        let out = apply_attack(&t, &spec).unwrap();
        assert_eq!(out.table.records()[0].load, t.records()[0].load * 1.5);
    }

    #[test]
    fn half_of_thousand_rows() {
        let out = apply_attack(&table(), &AttackSpec::new(AttackKind::NegUniform, 50.0, 3)).unwrap();
        assert_eq!(out.mask.len(), 500);
    }

    #[test]
    fn only_masked_loads_change_and_factors_invert() {
        let t = table();
        for kind in [AttackKind::PosUniform, AttackKind::PosGaussian, AttackKind::NegUniform] {
            let out = apply_attack(&t, &AttackSpec::new(kind, 30.0, 4)).unwrap();
            let mut masked = vec![false; t.len()];
            for &i in &out.mask {
                masked[i] = true;
            }
            for (i, (a, b)) in t.records().iter().zip(out.table.records()).enumerate() {
                assert_eq!(a.timestamp, b.timestamp);
                assert_eq!(a.temperature, b.temperature);
                if !masked[i] {
                    assert_eq!(a.load, b.load);
                }
                assert!(b.load > 0.0);
            }
            for (&i, &f) in out.mask.iter().zip(&out.factors) {
                let back = out.table.records()[i].load / f;
                assert!((back - t.records()[i].load).abs() <= 1e-12 * t.records()[i].load);
            }
        }
    }

    #[test]
    fn neg_uniform_is_capped() {
        let t = table();
        let mut spec = AttackSpec::new(AttackKind::NegUniform, 100.0, 5);
        spec.params = (150.0, 200.0);
        let out = apply_attack(&t, &spec).unwrap();
        assert!(out.factors.iter().all(|&f| (f - 0.01).abs() < 1e-15));
    }

    #[test]
    fn invalid_specs() {
        let t = table();
        let mut s = AttackSpec::new(AttackKind::PosUniform, 10.0, 1);
        s.target = AttackTarget::Test;
        assert!(matches!(apply_attack(&t, &s), Err(LoadError::InvalidSpec(_))));
        assert!(apply_attack(&t, &AttackSpec::new(AttackKind::PosUniform, 120.0, 1)).is_err());
        let mut s = AttackSpec::new(AttackKind::PosUniform, 10.0, 1);
        s.params = (50.0, 20.0);
        assert!(apply_attack(&t, &s).is_err());
        assert!("pos-gaussian".parse::<AttackKind>().is_ok());
        assert!("sideways".parse::<AttackKind>().is_err());
    }
}
