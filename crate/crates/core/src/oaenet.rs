//! The two-step outcome adaptive elastic net selection pipeline.
//!
//! Step one regresses the outcome on all covariates by OLS; the fitted
//! coefficients become adaptive weights `|beta_j|^-gamma`, so strong outcome
//! predictors are penalized lightly. Step two fits the weighted elastic-net
//! logistic treatment model, tunes `(lambda1, lambda2)` by cross-validation,
//! and keeps the covariates with nonzero coefficients.
//!
//! Fixing `lambda2 = 0` gives the outcome adaptive lasso.

use std::fmt;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::penalized_glm::{
    check_treatment, compute_weights, cross_validate, fit_enet_logistic, fit_ols, lambda_path,
    AdaptiveWeights, CvResult, DesignMatrix, EnetFit, OlsFit, PenaltySpec, W_MAX,
};
use crate::{Error, Result};

/// Coefficients at or below this magnitude count as unselected.
pub const SELECTION_THRESHOLD: f64 = 1e-8;

pub const DEFAULT_GAMMA: f64 = 3.0;

/// Covariates, binary treatment and continuous outcome over the same rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: DesignMatrix,
    pub a: Vec<u8>,
    pub y: Array1<f64>,
}

impl Dataset {
    pub fn new(x: DesignMatrix, a: Vec<u8>, y: Array1<f64>) -> Result<Self> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::Dimension(format!(
                "outcome has length {}, design has {n} rows",
                y.len()
            )));
        }
        check_treatment(&a, n)?;
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row,
                column: x.ncols(),
            });
        }
        Ok(Dataset { x, a, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn treated_count(&self) -> usize {
        self.a.iter().filter(|&&v| v == 1).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    OAENet,
    OLas,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::OAENet => "OAENet",
            Method::OLas => "OLas",
        })
    }
}

/// Penalty grid: a geometric `lambda1` path (from the data's `lambda_max`)
/// crossed with a list of `lambda2` levels, or an explicit list of pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub lambda1_count: usize,
    pub lambda1_ratio: f64,
    pub lambda2_values: Vec<f64>,
    pub explicit: Option<Vec<(f64, f64)>>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lambda1_count: 50,
            lambda1_ratio: 1e-3,
            lambda2_values: vec![0.01, 0.1, 1.0, 10.0],
            explicit: None,
        }
    }
}

impl GridConfig {
    /// Same `lambda1` path with the single level `lambda2 = 0`.
    pub fn lasso_only(&self) -> GridConfig {
        GridConfig {
            lambda2_values: vec![0.0],
            explicit: self
                .explicit
                .as_ref()
                .map(|pts| pts.iter().copied().filter(|&(_, l2)| l2 == 0.0).collect()),
            ..self.clone()
        }
    }

    pub fn build(
        &self,
        x: &DesignMatrix,
        a: &[u8],
        weights: &AdaptiveWeights,
    ) -> Result<Vec<(f64, f64)>> {
        if let Some(points) = &self.explicit {
            if points.is_empty() {
                return Err(Error::InvalidParameter(
                    "explicit penalty grid has no points".into(),
                ));
            }
            return Ok(points.clone());
        }
        if self.lambda2_values.is_empty() {
            return Err(Error::InvalidParameter("no lambda2 levels".into()));
        }
        let mut grid = Vec::with_capacity(self.lambda1_count * self.lambda2_values.len());
        for &l2 in &self.lambda2_values {
            let path = lambda_path(x, a, weights, l2, self.lambda1_count, self.lambda1_ratio)?;
            grid.extend(path.values.iter().map(|&l1| (l1, l2)));
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Selected column indices, ascending.
    pub selected: Vec<usize>,
    pub ols: OlsFit,
    pub weights: AdaptiveWeights,
    pub enet: EnetFit,
    pub cv: CvResult,
    pub gamma: f64,
    pub method: Method,
}

impl SelectionResult {
    pub fn selected_names<'a>(&self, x: &'a DesignMatrix) -> Vec<&'a str> {
        self.selected
            .iter()
            .map(|&j| x.column_names()[j].as_str())
            .collect()
    }
}

/// Runs the OAENet pipeline.
pub fn select_variables(
    data: &Dataset,
    gamma: f64,
    k_folds: usize,
    grid: &GridConfig,
    seed: u64,
) -> Result<SelectionResult> {
    run(data, gamma, k_folds, grid, seed, Method::OAENet)
}

/// Runs the pipeline with the `lambda2` grid fixed to `{0}`.
pub fn outcome_adaptive_lasso(
    data: &Dataset,
    gamma: f64,
    k_folds: usize,
    grid: &GridConfig,
    seed: u64,
) -> Result<SelectionResult> {
    run(data, gamma, k_folds, &grid.lasso_only(), seed, Method::OLas)
}

fn run(
    data: &Dataset,
    gamma: f64,
    k_folds: usize,
    grid: &GridConfig,
    seed: u64,
    method: Method,
) -> Result<SelectionResult> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must satisfy gamma > 1 for the outcome adaptive weights, got {gamma}"
        )));
    }
    if k_folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k_folds}"
        )));
    }
    let ols = fit_ols(&data.x, data.y.view())?;
    let weights = compute_weights(&ols, gamma, W_MAX)?;
    let points = grid.build(&data.x, &data.a, &weights)?;
    let cv = cross_validate(&data.x, &data.a, &weights, &points, k_folds, seed)?;
    let (lambda1, lambda2) = cv.selected;
    let penalty = PenaltySpec::new(lambda1, lambda2, weights.clone())?;
    let enet = fit_enet_logistic(&data.x, &data.a, &penalty, None)?;
    let selected = enet.support(SELECTION_THRESHOLD);
    Ok(SelectionResult {
        selected,
        ols,
        weights,
        enet,
        cv,
        gamma,
        method,
    })
}
