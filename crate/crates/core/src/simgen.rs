//! Synthetic corrupted-regression scenarios.
//!
//! Every instance satisfies `y = X w_true + e + z_true` with `e ~ N(0, σ²)`
//! and `z_true` supported on `round(p·m)` rows chosen uniformly. Draws happen
//! in a fixed order (X, w, e, support, corruption values) from one seeded
//! stream, so a spec determines its instance bit for bit.
//!
//! | type | X | w | σ | corruption |
//! |------|---|---|---|------------|
//! | 1 | N(0,1) | N(0,1) | median\|Xw\|/16 | ½N(12σ,(4σ)²) + ½N(−12σ,(4σ)²) |
//! | 2 | U(0,1) | N(0,5²) | 1 | ±25 equally likely |
//! | 3 | as 1 | as 1 | as 1 | N(12σ,(4σ)²) |
//! | 4 | as 2 | as 2 | as 2 | 25 |
//! | 5 | as 1 | as 1 | as 1 | N(0,(κσ)²) |
//! | 6 | D·B | N(0,1) | median\|Xw\|/16 | as 1 |
//!
//! Type 6 multiplies a Gaussian `D` by a column-mixing matrix `B` with
//! `B_jj = d_j`, `B_ij = (1 − d_j)/(n − 1)` off the diagonal and
//! `d = exp(linspace(−0.1, ln(1.1/n), n))`, which yields a badly spread
//! singular spectrum.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::random::{sample_indices, seeded_rng, uniform01, Gaussian, SimRng};
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioType {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
}

impl ScenarioType {
    pub const ALL: [ScenarioType; 6] = [Self::T1, Self::T2, Self::T3, Self::T4, Self::T5, Self::T6];

    pub fn default_m(self) -> usize {
        match self {
            Self::T2 | Self::T4 => 600,
            _ => 512,
        }
    }
}

impl fmt::Display for ScenarioType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = *self as usize + 1;
        write!(f, "T{k}")
    }
}

impl FromStr for ScenarioType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let digits = t.trim_start_matches("type").trim_start_matches('t').trim();
        match digits {
            "1" => Ok(Self::T1),
            "2" => Ok(Self::T2),
            "3" => Ok(Self::T3),
            "4" => Ok(Self::T4),
            "5" => Ok(Self::T5),
            "6" => Ok(Self::T6),
            _ => Err(Error::InvalidSpec(format!("unknown scenario type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    #[serde(rename = "type")]
    pub type_id: ScenarioType,
    pub m: usize,
    pub n: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub seed: u64,
}

impl SimSpec {
    /// Spec with the scenario's default row count.
    pub fn new(type_id: ScenarioType, n: usize, p: f64, seed: u64) -> Self {
        Self {
            type_id,
            m: type_id.default_m(),
            n,
            p,
            kappa: None,
            seed,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = m;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of corrupted rows, `round(p·m)`.
    pub fn outlier_count(&self) -> usize {
        (self.p * self.m as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::InvalidSpec(format!(
                "need m >= n >= 1, got m = {}, n = {}",
                self.m, self.n
            )));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidSpec(format!("p must lie in [0, 1], got {}", self.p)));
        }
        match (self.type_id, self.kappa) {
            (ScenarioType::T5, Some(k)) if k > 0.0 && k.is_finite() => Ok(()),
            (ScenarioType::T5, _) => Err(Error::InvalidSpec("type T5 needs kappa > 0".into())),
            (_, Some(_)) => Err(Error::InvalidSpec(format!(
                "kappa only applies to T5, not {}",
                self.type_id
            ))),
            (_, None) => Ok(()),
        }
    }

    /// `key = value` lines; `kappa` only when set.
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "type = {}\nm = {}\nn = {}\np = {}\n",
            self.type_id, self.m, self.n, self.p
        );
        if let Some(k) = self.kappa {
            s.push_str(&format!("kappa = {k}\n"));
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s
    }

    /// Parses a `key = value` block. Blank lines and `#` comments are
    /// ignored; `m` defaults per type and `seed` to 0.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut type_id = None;
        let mut m = None;
        let mut n = None;
        let mut p = None;
        let mut kappa = None;
        let mut seed = 0u64;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidSpec(format!("line {}: expected key = value", lineno + 1))
            })?;
            let value = value.trim();
            let bad = |what: &str| Error::InvalidSpec(format!("line {}: bad {what} {value:?}", lineno + 1));
            match key.trim() {
                "type" => type_id = Some(value.parse::<ScenarioType>()?),
                "m" => m = Some(value.parse().map_err(|_| bad("m"))?),
                "n" => n = Some(value.parse().map_err(|_| bad("n"))?),
                "p" => p = Some(value.parse().map_err(|_| bad("p"))?),
                "kappa" => kappa = Some(value.parse().map_err(|_| bad("kappa"))?),
                "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let type_id = type_id.ok_or_else(|| Error::InvalidSpec("missing key type".into()))?;
        let spec = SimSpec {
            type_id,
            m: m.unwrap_or_else(|| type_id.default_m()),
            n: n.ok_or_else(|| Error::InvalidSpec("missing key n".into()))?,
            p: p.ok_or_else(|| Error::InvalidSpec("missing key p".into()))?,
            kappa,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct SimInstance {
    pub x: Matrix,
    pub y: Vec<f64>,
    pub w_true: Vec<f64>,
    pub z_true: Vec<f64>,
    pub e: Vec<f64>,
    pub sigma: f64,
}

impl SimInstance {
    /// Rows with nonzero corruption, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.z_true.len()).filter(|&i| self.z_true[i] != 0.0).collect()
    }
}

/// Column-mixing matrix of the ill-conditioned scenario.
pub fn type6_mixing(n: usize) -> Matrix {
    if n == 1 {
        return Matrix::identity(1);
    }
    let hi = (1.1 / n as f64).ln();
    let d: Vec<f64> = (0..n)
        .map(|j| (-0.1 + (hi + 0.1) * j as f64 / (n - 1) as f64).exp())
        .collect();
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            d[j]
        } else {
            (1.0 - d[j]) / (n - 1) as f64
        }
    })
}

fn draw_design(spec: &SimSpec, rng: &mut SimRng, g: &mut Gaussian) -> Result<Matrix> {
    let (m, n) = (spec.m, spec.n);
    Ok(match spec.type_id {
        ScenarioType::T2 | ScenarioType::T4 => Matrix::from_fn(m, n, |_, _| uniform01(rng)),
        ScenarioType::T6 => {
            let d = Matrix::from_fn(m, n, |_, _| g.sample(rng));
            d.matmul(&type6_mixing(n))?
        }
        _ => Matrix::from_fn(m, n, |_, _| g.sample(rng)),
    })
}

fn draw_corruption(spec: &SimSpec, sigma: f64, rng: &mut SimRng, g: &mut Gaussian) -> f64 {
    match spec.type_id {
        ScenarioType::T1 | ScenarioType::T6 => {
            let centre = if uniform01(rng) < 0.5 { 12.0 } else { -12.0 };
            g.sample_with(rng, centre * sigma, 4.0 * sigma)
        }
        ScenarioType::T2 => {
            if uniform01(rng) < 0.5 {
                25.0
            } else {
                -25.0
            }
        }
        ScenarioType::T3 => g.sample_with(rng, 12.0 * sigma, 4.0 * sigma),
        ScenarioType::T4 => 25.0,
        ScenarioType::T5 => g.sample_with(rng, 0.0, spec.kappa.unwrap_or(0.0) * sigma),
    }
}

pub fn generate(spec: &SimSpec) -> Result<SimInstance> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let mut g = Gaussian::new();
    let x = draw_design(spec, &mut rng, &mut g)?;
    let sigma_w = match spec.type_id {
        ScenarioType::T2 | ScenarioType::T4 => 5.0,
        _ => 1.0,
    };
    let w_true: Vec<f64> = (0..spec.n).map(|_| sigma_w * g.sample(&mut rng)).collect();
    let clean = x.matvec(&w_true)?;
    let sigma = match spec.type_id {
        ScenarioType::T2 | ScenarioType::T4 => 1.0,
        _ => median(&clean.iter().map(|v| v.abs()).collect::<Vec<_>>()) / 16.0,
    };
    let e: Vec<f64> = (0..spec.m).map(|_| sigma * g.sample(&mut rng)).collect();
    let support = sample_indices(&mut rng, spec.m, spec.outlier_count());
    let mut z_true = vec![0.0; spec.m];
    for &i in &support {
        let mut v = draw_corruption(spec, sigma, &mut rng, &mut g);
        // a continuous draw of exactly zero would shrink the support
        while v == 0.0 {
            v = draw_corruption(spec, sigma, &mut rng, &mut g);
        }
        z_true[i] = v;
    }
    let y = (0..spec.m).map(|i| clean[i] + e[i] + z_true[i]).collect();
    Ok(SimInstance {
        x,
        y,
        w_true,
        z_true,
        e,
        sigma,
    })
}

/// `‖ŵ − w‖₂ / ‖w‖₂`.
pub fn relative_l2_error(w_hat: &[f64], w_true: &[f64]) -> Result<f64> {
    if w_hat.len() != w_true.len() {
        return Err(Error::LengthMismatch {
            expected: w_true.len(),
            got: w_hat.len(),
        });
    }
    let denom = linalg::norm2(w_true);
    if denom == 0.0 {
        return Err(Error::ZeroTruth);
    }
    Ok(linalg::dist2(w_hat, w_true) / denom)
}
