//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the crate's solvers.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn expit(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

/// Standard normal design (standardized by hand) and logistic treatment.
pub fn logistic_instance(
    n: usize,
    beta: &[f64],
    intercept: f64,
    seed: u64,
) -> (Array2<f64>, Vec<u8>) {
    let p = beta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
    for mut col in x.columns_mut() {
        let m = col.sum() / n as f64;
        col.mapv_inplace(|v| v - m);
        let sd = (col.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64).sqrt();
        col.mapv_inplace(|v| v / sd);
    }
    let a = (0..n)
        .map(|i| {
            let eta: f64 = intercept + (0..p).map(|j| x[[i, j]] * beta[j]).sum::<f64>();
            (rng.random::<f64>() < expit(eta)) as u8
        })
        .collect();
    (x, a)
}

/// Logistic MLE with intercept by Newton-Raphson on the full Hessian.
/// Returns (intercept, coefficients) or None if it fails to converge.
pub fn newton_logistic(x: ArrayView2<f64>, a: &[u8]) -> Option<(f64, Vec<f64>)> {
    let (n, p) = x.dim();
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let y = DVector::from_iterator(n, a.iter().map(|&v| v as f64));
    let mut theta = DVector::zeros(p + 1);
    for _ in 0..200 {
        let eta = &design * &theta;
        let prob = eta.map(expit);
        let w = prob.map(|q| q * (1.0 - q));
        let grad = design.transpose() * (&y - &prob);
        let mut hess = DMatrix::zeros(p + 1, p + 1);
        for i in 0..n {
            let row = design.row(i);
            hess += row.transpose() * row * w[i];
        }
        let step = hess.lu().solve(&grad)?;
        theta += &step;
        if step.amax() < 1e-13 {
            if theta.amax() > 25.0 {
                return None;
            }
            return Some((theta[0], theta.iter().skip(1).copied().collect()));
        }
    }
    None
}

fn loss(x: ArrayView2<f64>, a: &[u8], b: f64, alpha: &[f64]) -> f64 {
    (0..x.nrows())
        .map(|i| {
            let eta = b + alpha.iter().enumerate().map(|(j, c)| x[[i, j]] * c).sum::<f64>();
            softplus(eta) - a[i] as f64 * eta
        })
        .sum()
}

/// Unpenalized intercept minimizing the logistic loss for fixed slopes.
fn profile_intercept(x: ArrayView2<f64>, a: &[u8], alpha: &[f64], start: f64) -> f64 {
    let offsets: Vec<f64> = (0..x.nrows())
        .map(|i| alpha.iter().enumerate().map(|(j, c)| x[[i, j]] * c).sum())
        .collect();
    let mut b = start;
    for _ in 0..100 {
        let (mut g, mut h) = (0.0, 0.0);
        for (i, o) in offsets.iter().enumerate() {
            let q = expit(b + o);
            g += q - a[i] as f64;
            h += q * (1.0 - q);
        }
        let step = g / h;
        b -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    b
}

pub fn penalized_objective(
    x: ArrayView2<f64>,
    a: &[u8],
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
    b: f64,
    alpha: &[f64],
) -> f64 {
    loss(x, a, b, alpha)
        + lambda2 * alpha.iter().map(|v| v * v).sum::<f64>()
        + lambda1
            * alpha
                .iter()
                .zip(weights)
                .map(|(v, w)| w * v.abs())
                .sum::<f64>()
}

/// Two-coefficient penalized logistic fit by grid search over [-3, 3]^2,
/// coarse (0.05) then fine (0.001) around the coarse optimum. The intercept
/// is profiled out exactly at every grid point.
pub fn grid_search_2d(
    x: ArrayView2<f64>,
    a: &[u8],
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
) -> [f64; 2] {
    assert_eq!(x.ncols(), 2);
    let eval = |c: [f64; 2]| {
        let b = profile_intercept(x, a, &c, 0.0);
        penalized_objective(x, a, lambda1, lambda2, weights, b, &c)
    };
    let mut best = ([0.0, 0.0], f64::INFINITY);
    let coarse = 0.05;
    for i in 0..=120 {
        for j in 0..=120 {
            let c = [-3.0 + coarse * i as f64, -3.0 + coarse * j as f64];
            let f = eval(c);
            if f < best.1 {
                best = (c, f);
            }
        }
    }
    let centre = best.0;
    let fine = 0.001;
    for i in -100..=100 {
        for j in -100..=100 {
            let c = [
                (centre[0] + fine * i as f64).clamp(-3.0, 3.0),
                (centre[1] + fine * j as f64).clamp(-3.0, 3.0),
            ];
            let f = eval(c);
            if f < best.1 {
                best = (c, f);
            }
        }
    }
    best.0
}

/// Proximal gradient (FISTA with restart) on the penalized logistic
/// objective, intercept unpenalized. Slow but algorithmically unrelated to
/// coordinate descent.
pub fn proximal_gradient(
    x: ArrayView2<f64>,
    a: &[u8],
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
) -> (f64, Vec<f64>) {
    let (n, p) = x.dim();
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[[i, j - 1]] });
    let y = DVector::from_iterator(n, a.iter().map(|&v| v as f64));
    // Lipschitz bound of the smooth part: ||D||_2^2 / 4 + 2 lambda2
    let sv = design.clone().singular_values().max();
    let step = 1.0 / (sv * sv / 4.0 + 2.0 * lambda2);
    let smooth_grad = |theta: &DVector<f64>| {
        let prob = (&design * theta).map(expit);
        let mut g = design.transpose() * (prob - &y);
        for j in 1..=p {
            g[j] += 2.0 * lambda2 * theta[j];
        }
        g
    };
    let prox = |v: DVector<f64>| {
        let mut out = v;
        for j in 1..=p {
            let t = step * lambda1 * weights[j - 1];
            out[j] = if out[j] > t {
                out[j] - t
            } else if out[j] < -t {
                out[j] + t
            } else {
                0.0
            };
        }
        out
    };
    let objective = |theta: &DVector<f64>| {
        let c: Vec<f64> = theta.iter().skip(1).copied().collect();
        penalized_objective(x, a, lambda1, lambda2, weights, theta[0], &c)
    };
    let mut theta = DVector::zeros(p + 1);
    let mut z = theta.clone();
    let mut t = 1.0f64;
    let mut f_prev = objective(&theta);
    for _ in 0..200_000 {
        let next = prox(&z - smooth_grad(&z) * step);
        let f = objective(&next);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        if f > f_prev {
            // restart momentum
            z = theta.clone();
            t = 1.0;
            continue;
        }
        let moved = (&next - &theta).amax();
        z = &next + (&next - &theta) * ((t - 1.0) / t_next);
        theta = next;
        t = t_next;
        f_prev = f;
        if moved < 1e-11 {
            break;
        }
    }
    (theta[0], theta.iter().skip(1).copied().collect())
}

/// Largest violation of the penalized-logistic KKT conditions at a raw
/// minimizer, including stationarity of the intercept.
pub fn kkt_violation(
    x: ArrayView2<f64>,
    a: &[u8],
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
    intercept: f64,
    alpha: &Array1<f64>,
) -> f64 {
    let (n, p) = x.dim();
    let resid: Vec<f64> = (0..n)
        .map(|i| {
            let eta = intercept + (0..p).map(|j| x[[i, j]] * alpha[j]).sum::<f64>();
            expit(eta) - a[i] as f64
        })
        .collect();
    let mut worst = resid.iter().sum::<f64>().abs();
    for j in 0..p {
        let g: f64 = (0..n).map(|i| x[[i, j]] * resid[i]).sum();
        let v = if alpha[j] != 0.0 {
            (g + 2.0 * lambda2 * alpha[j] + lambda1 * weights[j] * alpha[j].signum()).abs()
        } else {
            (g.abs() - lambda1 * weights[j]).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Brute-force greedy replay: process treated units in `order`, each taking
/// the nearest unused control (lowest index on ties).
pub fn replay_greedy(scores: &[f64], a: &[u8], order: &[usize]) -> Vec<(usize, usize)> {
    let mut used = vec![false; a.len()];
    let mut pairs = Vec::new();
    for &t in order {
        let mut best: Option<usize> = None;
        for c in 0..a.len() {
            if a[c] != 0 || used[c] {
                continue;
            }
            best = match best {
                None => Some(c),
                Some(b) if (scores[t] - scores[c]).abs() < (scores[t] - scores[b]).abs() => Some(c),
                keep => keep,
            };
        }
        if let Some(c) = best {
            used[c] = true;
            pairs.push((t, c));
        }
    }
    pairs
}

/// Minimum total |score gap| over all maximum-cardinality 1:1 matchings.
pub fn optimal_total_gap(scores: &[f64], a: &[u8]) -> f64 {
    let treated: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 1).collect();
    let controls: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 0).collect();
    let k = treated.len().min(controls.len());
    fn rec(
        ti: usize,
        matched: usize,
        k: usize,
        treated: &[usize],
        controls: &[usize],
        used: &mut Vec<bool>,
        scores: &[f64],
        acc: f64,
        best: &mut f64,
    ) {
        if matched == k {
            *best = best.min(acc);
            return;
        }
        if ti == treated.len() || treated.len() - ti < k - matched {
            return;
        }
        // leave this treated unit unmatched
        rec(ti + 1, matched, k, treated, controls, used, scores, acc, best);
        for c in 0..controls.len() {
            if !used[c] {
                used[c] = true;
                let gap = (scores[treated[ti]] - scores[controls[c]]).abs();
                rec(ti + 1, matched + 1, k, treated, controls, used, scores, acc + gap, best);
                used[c] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; controls.len()];
    rec(0, 0, k, &treated, &controls, &mut used, scores, 0.0, &mut best);
    best
}
