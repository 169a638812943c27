//! Simulation scenarios with known variable roles.
//!
//! Covariates are Gaussian with common variance `sigma^2` and either
//! exchangeable (equicorrelated) or AR(1) correlation; treatment is a
//! Bernoulli draw with logit-linear probability; the outcome is linear in the
//! covariates plus `true_te * a` and optional Gaussian noise.
//!
//! Column indices are 0-based throughout: `X1` is column 0.

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::oaenet::Dataset;
use crate::penalized_glm::{sigmoid, standardize, DesignMatrix};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Correlation {
    #[default]
    Equicorrelated,
    Ar1,
}

fn default_noise() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub label: String,
    pub n: usize,
    pub p: usize,
    pub rho: f64,
    /// Per-covariate standard deviation.
    pub sigma: f64,
    /// Sparse `(column, coefficient)` pairs of the treatment logit.
    pub treatment_coefficients: Vec<(usize, f64)>,
    /// Sparse `(column, coefficient)` pairs of the outcome mean.
    pub outcome_coefficients: Vec<(usize, f64)>,
    pub true_te: f64,
    #[serde(default)]
    pub correlation: Correlation,
    /// Standard deviation of the additive outcome noise; 0 disables it.
    #[serde(default = "default_noise")]
    pub outcome_noise_sd: f64,
}

/// Partition of the columns by their role in the data-generating model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableRoles {
    pub confounders: BTreeSet<usize>,
    pub outcome_predictors: BTreeSet<usize>,
    pub treatment_predictors: BTreeSet<usize>,
    pub spurious: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleKind {
    /// Confounders and outcome predictors.
    Targ,
    /// Confounders only.
    Conf,
    /// Confounders and treatment predictors.
    PotConf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBenchmark {
    pub kind: OracleKind,
    pub variable_set: BTreeSet<usize>,
}

fn support(coefs: &[(usize, f64)]) -> BTreeSet<usize> {
    coefs
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|&(j, _)| j)
        .collect()
}

fn dense(coefs: &[(usize, f64)], p: usize) -> Vec<f64> {
    let mut out = vec![0.0; p];
    for &(j, v) in coefs {
        out[j] += v;
    }
    out
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("scenario {}: {msg}", self.label)));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.p == 0 {
            return bad("p must be positive".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.outcome_noise_sd >= 0.0 && self.outcome_noise_sd.is_finite()) {
            return bad(format!(
                "outcome noise sd must be non-negative, got {}",
                self.outcome_noise_sd
            ));
        }
        if !self.true_te.is_finite() {
            return bad("true_te must be finite".into());
        }
        for (name, coefs) in [
            ("treatment", &self.treatment_coefficients),
            ("outcome", &self.outcome_coefficients),
        ] {
            let mut seen = BTreeSet::new();
            for &(j, v) in coefs {
                if j >= self.p {
                    return bad(format!("{name} coefficient index {j} >= p = {}", self.p));
                }
                if !v.is_finite() {
                    return bad(format!("{name} coefficient at {j} is not finite"));
                }
                if !seen.insert(j) {
                    return bad(format!("{name} coefficient index {j} repeated"));
                }
            }
        }
        Ok(())
    }

    pub fn roles(&self) -> VariableRoles {
        let t = support(&self.treatment_coefficients);
        let o = support(&self.outcome_coefficients);
        VariableRoles {
            confounders: t.intersection(&o).copied().collect(),
            outcome_predictors: o.difference(&t).copied().collect(),
            treatment_predictors: t.difference(&o).copied().collect(),
            spurious: (0..self.p)
                .filter(|j| !t.contains(j) && !o.contains(j))
                .collect(),
        }
    }

    pub fn oracle(&self, kind: OracleKind) -> OracleBenchmark {
        let r = self.roles();
        let variable_set = match kind {
            OracleKind::Targ => r.confounders.union(&r.outcome_predictors).copied().collect(),
            OracleKind::Conf => r.confounders,
            OracleKind::PotConf => r
                .confounders
                .union(&r.treatment_predictors)
                .copied()
                .collect(),
        };
        OracleBenchmark { kind, variable_set }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ScenarioSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// One of the four built-in scenarios `1A`, `1B`, `2A`, `2B` at n = 1000.
///
/// Scenario 1: 100 standard normal covariates; treatment logit
/// `X1 + .. + X10 + X21 + .. + X30`; outcome `0.6 (X1 + .. + X20)`; TE 0.5.
/// Scenario 2: 100 covariates of variance 4; treatment logit
/// `0.5 X1 - X2 + 0.3 X5 - 0.3 X6 + 0.3 X7 - 0.3 X8`; outcome
/// `2 X1 + 2 X2 + 5 X3 + 5 X4`; TE 1. Suffix A is rho = 0, B is rho = 0.5.
pub fn builtin_scenario(label: &str) -> Result<ScenarioSpec> {
    let upper = label.trim().to_ascii_uppercase();
    let rho = match upper.as_bytes() {
        [_, b'A'] => 0.0,
        [_, b'B'] => 0.5,
        _ => return Err(Error::UnknownScenario(label.to_string())),
    };
    let spec = match upper.as_bytes()[0] {
        b'1' => ScenarioSpec {
            label: upper.clone(),
            n: 1000,
            p: 100,
            rho,
            sigma: 1.0,
            treatment_coefficients: (0..10).chain(20..30).map(|j| (j, 1.0)).collect(),
            outcome_coefficients: (0..20).map(|j| (j, 0.6)).collect(),
            true_te: 0.5,
            correlation: Correlation::Equicorrelated,
            outcome_noise_sd: 1.0,
        },
        b'2' => ScenarioSpec {
            label: upper.clone(),
            n: 1000,
            p: 100,
            rho,
            sigma: 2.0,
            treatment_coefficients: vec![
                (0, 0.5),
                (1, -1.0),
                (4, 0.3),
                (5, -0.3),
                (6, 0.3),
                (7, -0.3),
            ],
            outcome_coefficients: vec![(0, 2.0), (1, 2.0), (2, 5.0), (3, 5.0)],
            true_te: 1.0,
            correlation: Correlation::Equicorrelated,
            outcome_noise_sd: 1.0,
        },
        _ => return Err(Error::UnknownScenario(label.to_string())),
    };
    Ok(spec)
}

/// A draw on the original covariate scale.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDraw {
    pub x: Array2<f64>,
    pub a: Vec<u8>,
    pub y: Array1<f64>,
}

impl RawDraw {
    pub fn column_names(&self) -> Vec<String> {
        (1..=self.x.ncols()).map(|j| format!("X{j}")).collect()
    }
}

/// Logistic function `e^x / (1 + e^x)`.
pub fn expit(x: f64) -> f64 {
    sigmoid(x)
}

pub fn generate_raw(spec: &ScenarioSpec, seed: u64) -> Result<RawDraw> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut x = Array2::zeros((n, p));
    let mut rng = stream_rng(seed, Stream::Covariates);
    match spec.correlation {
        Correlation::Equicorrelated => {
            let own = (1.0 - spec.rho).sqrt();
            let shared = spec.rho.sqrt();
            for mut row in x.rows_mut() {
                let z0: f64 = rng.sample(StandardNormal);
                for v in row.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = spec.sigma * (own * z + shared * z0);
                }
            }
        }
        Correlation::Ar1 => {
            let innov = (1.0 - spec.rho * spec.rho).sqrt();
            for mut row in x.rows_mut() {
                let mut prev: f64 = rng.sample(StandardNormal);
                row[0] = spec.sigma * prev;
                for v in row.iter_mut().skip(1) {
                    let z: f64 = rng.sample(StandardNormal);
                    prev = spec.rho * prev + innov * z;
                    *v = spec.sigma * prev;
                }
            }
        }
    }

    let theta = dense(&spec.treatment_coefficients, p);
    let eta_coef = dense(&spec.outcome_coefficients, p);
    let mut trng = stream_rng(seed, Stream::Treatment);
    let mut nrng = stream_rng(seed, Stream::OutcomeNoise);
    let mut a = Vec::with_capacity(n);
    let mut y = Array1::zeros(n);
    for (i, row) in x.rows().into_iter().enumerate() {
        let logit: f64 = row.iter().zip(&theta).map(|(x, t)| x * t).sum();
        let u: f64 = trng.random();
        let ai = (u < expit(logit)) as u8;
        a.push(ai);
        let mean: f64 = row.iter().zip(&eta_coef).map(|(x, b)| x * b).sum();
        let noise = if spec.outcome_noise_sd > 0.0 {
            spec.outcome_noise_sd * nrng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        y[i] = spec.true_te * ai as f64 + mean + noise;
    }
    Ok(RawDraw { x, a, y })
}

/// Draws a dataset and standardizes its covariates.
pub fn generate(spec: &ScenarioSpec, seed: u64) -> Result<Dataset> {
    let raw = generate_raw(spec, seed)?;
    let names = raw.column_names();
    let x: DesignMatrix = standardize(raw.x)?.with_names(names)?;
    Dataset::new(x, raw.a, raw.y)
}
