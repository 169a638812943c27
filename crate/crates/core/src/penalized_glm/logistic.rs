use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::{check_treatment, clip_prob, sigmoid, softplus, DesignMatrix, PenaltySpec};
use crate::{Error, Result};

/// Stopping rule of the coordinate-descent solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Converged once a full sweep moves no coefficient (or the intercept)
    /// by more than this.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-7,
            max_sweeps: 10_000,
        }
    }
}

/// Starting point on the raw (unrescaled) scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub intercept: f64,
    pub coefficients: Array1<f64>,
}

/// Fitted weighted elastic-net logistic model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnetFit {
    pub intercept: f64,
    /// `rescale_factor * raw_coefficients`.
    pub coefficients: Array1<f64>,
    /// Minimizer of the penalized objective, before rescaling.
    pub raw_coefficients: Array1<f64>,
    pub rescale_factor: f64,
    /// Penalized objective at the raw minimizer.
    pub objective_value: f64,
    pub converged: bool,
    pub sweeps: usize,
    /// Exact penalized objective after each sweep.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl EnetFit {
    pub fn warm_start(&self) -> WarmStart {
        WarmStart {
            intercept: self.intercept,
            coefficients: self.raw_coefficients.clone(),
        }
    }

    /// Linear predictor of the raw minimizer.
    pub fn linear_predictor(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.dot(&self.raw_coefficients) + self.intercept
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array1<f64> {
        self.linear_predictor(x).mapv(sigmoid)
    }

    /// Indices with `|coefficient| > threshold`.
    pub fn support(&self, threshold: f64) -> Vec<usize> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > threshold)
            .map(|(j, _)| j)
            .collect()
    }
}

/// Column-major copy of a design together with a 0/1 response.
pub(crate) struct Problem {
    n: usize,
    p: usize,
    cols: Vec<f64>,
    a: Vec<f64>,
}

impl Problem {
    pub(crate) fn new(x: ArrayView2<f64>, a: &[u8]) -> Self {
        let (n, p) = x.dim();
        let mut cols = Vec::with_capacity(n * p);
        for j in 0..p {
            cols.extend(x.column(j).iter());
        }
        Problem {
            n,
            p,
            cols,
            a: a.iter().map(|&v| v as f64).collect(),
        }
    }

    /// Sub-problem over the given rows.
    pub(crate) fn rows(x: ArrayView2<f64>, a: &[u8], rows: &[usize]) -> Self {
        let p = x.ncols();
        let mut cols = Vec::with_capacity(rows.len() * p);
        for j in 0..p {
            cols.extend(rows.iter().map(|&i| x[[i, j]]));
        }
        Problem {
            n: rows.len(),
            p,
            cols,
            a: rows.iter().map(|&i| a[i] as f64).collect(),
        }
    }

    #[inline]
    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    fn linear_predictor(&self, intercept: f64, alpha: &[f64]) -> Vec<f64> {
        let mut eta = vec![intercept; self.n];
        for (j, &aj) in alpha.iter().enumerate() {
            if aj != 0.0 {
                for (e, x) in eta.iter_mut().zip(self.col(j)) {
                    *e += x * aj;
                }
            }
        }
        eta
    }

    fn loss(&self, eta: &[f64]) -> f64 {
        eta.iter()
            .zip(&self.a)
            .map(|(&e, &ai)| softplus(e) - ai * e)
            .sum()
    }

    fn null_intercept(&self) -> f64 {
        let mean = self.a.iter().sum::<f64>() / self.n as f64;
        let m = clip_prob(mean);
        (m / (1.0 - m)).ln()
    }
}

fn penalty_value(alpha: &[f64], lambda1: f64, lambda2: f64, weights: &[f64]) -> f64 {
    let mut l1 = 0.0;
    let mut l2 = 0.0;
    for (&aj, &wj) in alpha.iter().zip(weights) {
        if aj != 0.0 {
            l1 += wj * aj.abs();
            l2 += aj * aj;
        }
    }
    lambda2 * l2 + lambda1 * l1
}

#[inline]
fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Penalized objective at `(intercept, raw_coefficients)`.
pub fn logistic_objective(
    x: &DesignMatrix,
    a: &[u8],
    penalty: &PenaltySpec,
    intercept: f64,
    raw_coefficients: &Array1<f64>,
) -> f64 {
    let prob = Problem::new(x.values(), a);
    let alpha = raw_coefficients.to_vec();
    prob.loss(&prob.linear_predictor(intercept, &alpha))
        + penalty_value(
            &alpha,
            penalty.lambda1,
            penalty.lambda2,
            penalty.weights.weights.as_slice().expect("contiguous"),
        )
}

pub fn fit_enet_logistic(
    x: &DesignMatrix,
    a: &[u8],
    penalty: &PenaltySpec,
    init: Option<&WarmStart>,
) -> Result<EnetFit> {
    fit_enet_logistic_with(x, a, penalty, init, &SolverOptions::default())
}

pub fn fit_enet_logistic_with(
    x: &DesignMatrix,
    a: &[u8],
    penalty: &PenaltySpec,
    init: Option<&WarmStart>,
    options: &SolverOptions,
) -> Result<EnetFit> {
    check_treatment(a, x.nrows())?;
    let p = x.ncols();
    if penalty.weights.len() != p {
        return Err(Error::Dimension(format!(
            "{} adaptive weights for {p} columns",
            penalty.weights.len()
        )));
    }
    if let Some(start) = init {
        if start.coefficients.len() != p {
            return Err(Error::Dimension(format!(
                "warm start has {} coefficients, design has {p} columns",
                start.coefficients.len()
            )));
        }
    }
    let prob = Problem::new(x.values(), a);
    let weights = penalty.weights.weights.to_vec();
    Ok(solve(
        &prob,
        penalty.lambda1,
        penalty.lambda2,
        &weights,
        init,
        options,
    ))
}

/// Proximal Newton coordinate descent.
///
/// Each sweep builds the IRLS quadratic model of the logistic loss at the
/// current point, makes one soft-thresholded coordinate pass over it, then
/// backtracks along the resulting direction until the exact penalized
/// objective does not increase. After a full pass that moves something,
/// passes are restricted to the nonzero coefficients until they settle, and
/// a full pass decides convergence.
pub(crate) fn solve(
    prob: &Problem,
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
    init: Option<&WarmStart>,
    options: &SolverOptions,
) -> EnetFit {
    let (n, p) = (prob.n, prob.p);
    let (mut b, mut alpha) = match init {
        Some(s) => (s.intercept, s.coefficients.to_vec()),
        None => (prob.null_intercept(), vec![0.0; p]),
    };
    let mut eta = prob.linear_predictor(b, &alpha);
    let mut obj = prob.loss(&eta) + penalty_value(&alpha, lambda1, lambda2, weights);

    let mut w = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut deta = vec![0.0; n];
    let mut cand_eta = vec![0.0; n];
    let mut alpha_t = vec![0.0; p];
    let mut cand_alpha = vec![0.0; p];
    let mut trace = Vec::new();

    let mut sweeps = 0;
    let mut converged = false;
    let mut active_only = false;

    while sweeps < options.max_sweeps {
        sweeps += 1;
        let mut sw = 0.0;
        let mut su = 0.0;
        for i in 0..n {
            let pi = clip_prob(sigmoid(eta[i]));
            w[i] = pi * (1.0 - pi);
            u[i] = prob.a[i] - pi;
            deta[i] = 0.0;
            sw += w[i];
            su += u[i];
        }
        let db = su / sw;
        for i in 0..n {
            u[i] -= w[i] * db;
            deta[i] = db;
        }

        alpha_t.copy_from_slice(&alpha);
        for j in 0..p {
            if active_only && alpha[j] == 0.0 {
                continue;
            }
            let col = prob.col(j);
            let mut h = 0.0;
            let mut g = 0.0;
            for i in 0..n {
                h += w[i] * col[i] * col[i];
                g += col[i] * u[i];
            }
            let denom = h + 2.0 * lambda2;
            if denom <= 0.0 {
                continue;
            }
            let updated = soft_threshold(g + h * alpha_t[j], lambda1 * weights[j]) / denom;
            let d = updated - alpha_t[j];
            if d != 0.0 {
                for i in 0..n {
                    u[i] -= w[i] * col[i] * d;
                    deta[i] += col[i] * d;
                }
                alpha_t[j] = updated;
            }
        }

        let step = alpha
            .iter()
            .zip(&alpha_t)
            .map(|(o, t)| (t - o).abs())
            .fold(db.abs(), f64::max);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            for j in 0..p {
                cand_alpha[j] = alpha[j] + t * (alpha_t[j] - alpha[j]);
            }
            for i in 0..n {
                cand_eta[i] = eta[i] + t * deta[i];
            }
            let f = prob.loss(&cand_eta) + penalty_value(&cand_alpha, lambda1, lambda2, weights);
            if f <= obj {
                obj = f;
                b += t * db;
                alpha.copy_from_slice(&cand_alpha);
                std::mem::swap(&mut eta, &mut cand_eta);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(obj);

        if !accepted {
            // no representable decrease along a descent direction
            converged = step < 1e-5;
            break;
        }
        if t * step < options.tolerance {
            if active_only {
                active_only = false;
            } else {
                converged = true;
                break;
            }
        } else if !active_only {
            active_only = true;
        }
    }

    let rescale_factor = 1.0 + lambda2 / n as f64;
    let raw = Array1::from_vec(alpha);
    EnetFit {
        intercept: b,
        coefficients: raw.mapv(|v| v * rescale_factor),
        raw_coefficients: raw,
        rescale_factor,
        objective_value: obj,
        converged,
        sweeps,
        objective_trace: trace,
    }
}
