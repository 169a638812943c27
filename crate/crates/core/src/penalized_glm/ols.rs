use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::DesignMatrix;
use crate::{Error, Result};

const RIDGE_JITTER: f64 = 1e-8;

/// Least-squares outcome model with an unpenalized intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub intercept: f64,
    pub coefficients: Array1<f64>,
    pub residual_sum_squares: f64,
    /// True when the Gram matrix was singular (or n <= p) and a ridge
    /// jitter was added to solve it.
    pub regularized: bool,
}

impl OlsFit {
    pub fn predict(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.dot(&self.coefficients) + self.intercept
    }
}

pub fn fit_ols(x: &DesignMatrix, y: ArrayView1<f64>) -> Result<OlsFit> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "outcome has length {}, design has {n} rows",
            y.len()
        )));
    }
    if let Some(row) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row, column: p });
    }
    let xv = x.values();
    let x_mean = xv.mean_axis(Axis(0)).expect("n >= 2");
    let y_mean = y.sum() / n as f64;
    let xc = &xv - &x_mean;
    let yc = y.mapv(|v| v - y_mean);

    let gram = xc.t().dot(&xc);
    let rhs = xc.t().dot(&yc);

    let mut regularized = n <= p;
    let mut jitter = if regularized { RIDGE_JITTER } else { 0.0 };
    let beta = loop {
        let mut g = gram.clone();
        for j in 0..p {
            g[[j, j]] += jitter;
        }
        match cholesky_solve(g, &rhs) {
            Some(b) => break b,
            None => {
                regularized = true;
                jitter = if jitter == 0.0 {
                    RIDGE_JITTER
                } else {
                    jitter * 10.0
                };
            }
        }
    };

    let intercept = y_mean - x_mean.dot(&beta);
    let resid = &yc - &xc.dot(&beta);
    let rss = resid.dot(&resid);
    Ok(OlsFit {
        intercept,
        coefficients: beta,
        residual_sum_squares: rss,
        regularized,
    })
}

/// Solves `g b = rhs` for symmetric positive definite `g`. Returns `None`
/// when a pivot is not safely positive relative to the diagonal scale.
fn cholesky_solve(mut g: Array2<f64>, rhs: &Array1<f64>) -> Option<Array1<f64>> {
    let p = g.nrows();
    let scale = (0..p).map(|j| g[[j, j]].abs()).fold(0.0, f64::max).max(1.0);
    for j in 0..p {
        let mut d = g[[j, j]];
        for k in 0..j {
            d -= g[[j, k]] * g[[j, k]];
        }
        if d <= 1e-12 * scale {
            return None;
        }
        let d = d.sqrt();
        g[[j, j]] = d;
        for i in (j + 1)..p {
            let mut s = g[[i, j]];
            for k in 0..j {
                s -= g[[i, k]] * g[[j, k]];
            }
            g[[i, j]] = s / d;
        }
    }
    // forward: L z = rhs
    let mut z = rhs.clone();
    for i in 0..p {
        let mut s = z[i];
        for k in 0..i {
            s -= g[[i, k]] * z[k];
        }
        z[i] = s / g[[i, i]];
    }
    // back: L' b = z
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in (i + 1)..p {
            s -= g[[k, i]] * z[k];
        }
        z[i] = s / g[[i, i]];
    }
    Some(z)
}
