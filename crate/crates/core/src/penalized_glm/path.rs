use serde::{Deserialize, Serialize};

use super::{check_treatment, AdaptiveWeights, DesignMatrix};
use crate::{Error, Result};

/// Decreasing sequence of L1 penalty levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPath {
    pub values: Vec<f64>,
    pub lambda_max: f64,
    /// Set when no covariate can ever enter (`lambda_max == 0`); `values` is
    /// then the single point `[0.0]`.
    pub degenerate: bool,
}

/// Smallest `lambda1` at which the fit is the intercept-only model:
/// `max_j |sum_i x_ij (a_i - mean(a))| / w_j`.
pub fn lambda_max(x: &DesignMatrix, a: &[u8], weights: &AdaptiveWeights) -> Result<f64> {
    check_treatment(a, x.nrows())?;
    if weights.len() != x.ncols() {
        return Err(Error::Dimension(format!(
            "{} adaptive weights for {} columns",
            weights.len(),
            x.ncols()
        )));
    }
    let n = x.nrows() as f64;
    let abar = a.iter().map(|&v| v as f64).sum::<f64>() / n;
    let xv = x.values();
    let mut best = 0.0f64;
    for (j, col) in xv.columns().into_iter().enumerate() {
        let g: f64 = col
            .iter()
            .zip(a)
            .map(|(x, &ai)| x * (ai as f64 - abar))
            .sum();
        best = best.max(g.abs() / weights.weights[j]);
    }
    Ok(best)
}

/// Geometric sequence from `lambda_max` down to `ratio * lambda_max`.
/// The `lambda2` argument does not move `lambda_max`; it is accepted so the
/// path can be requested per L2 level.
pub fn lambda_path(
    x: &DesignMatrix,
    a: &[u8],
    weights: &AdaptiveWeights,
    _lambda2: f64,
    path_length: usize,
    ratio: f64,
) -> Result<LambdaPath> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "path ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if path_length < 2 {
        return Err(Error::InvalidParameter(format!(
            "path length must be at least 2, got {path_length}"
        )));
    }
    let lmax = lambda_max(x, a, weights)?;
    if lmax == 0.0 {
        return Ok(LambdaPath {
            values: vec![0.0],
            lambda_max: 0.0,
            degenerate: true,
        });
    }
    let step = ratio.ln() / (path_length - 1) as f64;
    let mut values: Vec<f64> = (0..path_length)
        .map(|k| lmax * (step * k as f64).exp())
        .collect();
    values[0] = lmax;
    values[path_length - 1] = ratio * lmax;
    Ok(LambdaPath {
        values,
        lambda_max: lmax,
        degenerate: false,
    })
}
