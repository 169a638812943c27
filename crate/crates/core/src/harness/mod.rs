//! Monte Carlo experiment runner.
//!
//! Each replication draws a dataset from the scenario, asks every configured
//! method for a covariate set, fits the propensity model on it, matches and
//! records the ATT. Replications run in parallel; every random draw is keyed
//! on the replication seed so results do not depend on scheduling or on
//! which other methods are configured.

mod ingest;
mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ingest::{ingest_dataset, write_dataset_csv};
pub use report::{write_report, REPORT_FILES};

use crate::matching::{estimate_att, fit_propensity, match_nearest_neighbor, MatchOptions};
use crate::oaenet::{outcome_adaptive_lasso, select_variables, GridConfig, DEFAULT_GAMMA};
use crate::rng::replication_seed;
use crate::simulation::{generate, OracleKind, ScenarioSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MethodKind {
    OAENet,
    OLas,
    Targ,
    Conf,
    PotConf,
}

impl MethodKind {
    pub const ALL: [MethodKind; 5] = [
        MethodKind::OAENet,
        MethodKind::OLas,
        MethodKind::Targ,
        MethodKind::Conf,
        MethodKind::PotConf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::OAENet => "OAENet",
            MethodKind::OLas => "OLas",
            MethodKind::Targ => "Targ",
            MethodKind::Conf => "Conf",
            MethodKind::PotConf => "PotConf",
        }
    }

    pub fn oracle(self) -> Option<OracleKind> {
        match self {
            MethodKind::Targ => Some(OracleKind::Targ),
            MethodKind::Conf => Some(OracleKind::Conf),
            MethodKind::PotConf => Some(OracleKind::PotConf),
            _ => None,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['.', '_', '-'], "");
        MethodKind::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .or(match key.as_str() {
                "onet" => Some(MethodKind::OAENet),
                "target" => Some(MethodKind::Targ),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSpec,
    pub replications: usize,
    pub methods: Vec<MethodKind>,
    pub gamma: f64,
    pub k_folds: usize,
    pub grid: GridConfig,
    pub matching: MatchOptions,
    pub root_seed: u64,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioSpec) -> Self {
        ExperimentConfig {
            scenario,
            replications: 1000,
            methods: vec![MethodKind::OAENet, MethodKind::Targ],
            gamma: DEFAULT_GAMMA,
            k_folds: 5,
            grid: GridConfig::default(),
            matching: MatchOptions::default(),
            root_seed: 0,
            threads: None,
            output_dir: None,
        }
    }

    /// Validates and puts methods in report order (by name, deduplicated).
    pub fn resolved(&self) -> Result<ExperimentConfig> {
        self.scenario.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        let mut methods = self.methods.clone();
        methods.sort_by_key(|m| m.name());
        methods.dedup();
        if methods.is_empty() {
            return Err(Error::InvalidParameter("no methods configured".into()));
        }
        if self.k_folds < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 folds, got {}",
                self.k_folds
            )));
        }
        if let Some(0) = self.threads {
            return Err(Error::InvalidParameter("threads must be positive".into()));
        }
        Ok(ExperimentConfig {
            methods,
            ..self.clone()
        })
    }
}

/// Outcome of one method in one replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRow {
    pub replication: usize,
    pub method: MethodKind,
    /// `"ok"`, `"no_overlap"` or `"error:<kind>"`.
    pub status: String,
    pub att: Option<f64>,
    pub n_pairs: usize,
    pub selected: Vec<bool>,
}

impl ReplicationRow {
    pub fn succeeded(&self) -> bool {
        self.att.is_some()
    }

    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodKind,
    pub successes: usize,
    pub failures: usize,
    pub mean_att: f64,
    pub bias: f64,
    /// Sample variance (n - 1 denominator) of the successful ATTs.
    pub variance: f64,
    pub mean_selected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ReplicationRow>,
    pub summary: Vec<MethodSummary>,
    /// Per method, the share of successful replications selecting each column.
    pub selection_proportions: Vec<(MethodKind, Vec<f64>)>,
}

impl MonteCarloReport {
    pub fn summary_for(&self, method: MethodKind) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }

    pub fn proportions_for(&self, method: MethodKind) -> Option<&[f64]> {
        self.selection_proportions
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, v)| v.as_slice())
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<MonteCarloReport> {
    let config = config.resolved()?;
    let work = || -> Vec<Vec<ReplicationRow>> {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(&config, r))
            .collect()
    };
    let per_rep = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let rows: Vec<ReplicationRow> = per_rep.into_iter().flatten().collect();
    Ok(summarize(config, rows))
}

fn run_replication(config: &ExperimentConfig, replication: usize) -> Vec<ReplicationRow> {
    let seed = replication_seed(config.root_seed, replication as u64);
    let p = config.scenario.p;
    let failed = |method, status: String| ReplicationRow {
        replication,
        method,
        status,
        att: None,
        n_pairs: 0,
        selected: vec![false; p],
    };
    let data = match generate(&config.scenario, seed) {
        Ok(d) => d,
        Err(e) => {
            return config
                .methods
                .iter()
                .map(|&m| failed(m, format!("error:{}", e.kind())))
                .collect()
        }
    };
    config
        .methods
        .iter()
        .map(|&method| {
            let chosen: Result<Vec<usize>> = match method {
                MethodKind::OAENet => {
                    select_variables(&data, config.gamma, config.k_folds, &config.grid, seed)
                        .map(|r| r.selected)
                }
                MethodKind::OLas => {
                    outcome_adaptive_lasso(&data, config.gamma, config.k_folds, &config.grid, seed)
                        .map(|r| r.selected)
                }
                oracle => {
                    let kind = oracle.oracle().expect("oracle method");
                    Ok(config.scenario.oracle(kind).variable_set.into_iter().collect())
                }
            };
            let chosen = match chosen {
                Ok(c) => c,
                Err(e) => return failed(method, format!("error:{}", e.kind())),
            };
            let mut selected = vec![false; p];
            for &j in &chosen {
                selected[j] = true;
            }
            let estimate = fit_propensity(&data, &chosen)
                .and_then(|ps| match_nearest_neighbor(&ps.scores, &data.a, &config.matching, seed))
                .and_then(|m| estimate_att(&m, data.y.as_slice().expect("contiguous")));
            match estimate {
                Ok(est) => ReplicationRow {
                    replication,
                    method,
                    status: "ok".into(),
                    att: Some(est.att),
                    n_pairs: est.n_pairs,
                    selected,
                },
                Err(Error::NoOverlap) => ReplicationRow {
                    selected,
                    ..failed(method, "no_overlap".into())
                },
                Err(e) => ReplicationRow {
                    selected,
                    ..failed(method, format!("error:{}", e.kind()))
                },
            }
        })
        .collect()
}

/// Aggregates rows (in replication, then method order) into per-method summaries.
pub fn summarize(config: ExperimentConfig, rows: Vec<ReplicationRow>) -> MonteCarloReport {
    let p = config.scenario.p;
    let te = config.scenario.true_te;
    let mut summary = Vec::new();
    let mut proportions = Vec::new();
    for &method in &config.methods {
        let mine: Vec<&ReplicationRow> = rows.iter().filter(|r| r.method == method).collect();
        let ok: Vec<&ReplicationRow> = mine.iter().copied().filter(|r| r.succeeded()).collect();
        let atts: Vec<f64> = ok.iter().map(|r| r.att.expect("success")).collect();
        let (mean, variance) = moments(&atts);
        let mut counts = vec![0usize; p];
        for r in &ok {
            for (c, &s) in counts.iter_mut().zip(&r.selected) {
                *c += s as usize;
            }
        }
        let k = ok.len() as f64;
        proportions.push((
            method,
            counts.iter().map(|&c| c as f64 / k).collect::<Vec<f64>>(),
        ));
        summary.push(MethodSummary {
            method,
            successes: ok.len(),
            failures: mine.len() - ok.len(),
            mean_att: mean,
            bias: mean - te,
            variance,
            mean_selected: ok.iter().map(|r| r.selected_count() as f64).sum::<f64>() / k,
        });
    }
    MonteCarloReport {
        config,
        rows,
        summary,
        selection_proportions: proportions,
    }
}

/// Mean and sample variance, summed in input order. An empty input gives
/// NaN for both; a single value has variance 0.
pub fn moments(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, ss / (n - 1.0))
}
