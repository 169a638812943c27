//! Penalized generalized linear model solvers.
//!
//! Contains the unpenalized OLS outcome model, the adaptive weight map, and
//! the adaptively weighted elastic-net logistic regression
//!
//! ```text
//! argmin_{b, alpha}  sum_i [ log(1 + exp(b + x_i'alpha)) - a_i (b + x_i'alpha) ]
//!                    + lambda2 ||alpha||_2^2 + lambda1 sum_j w_j |alpha_j|
//! ```
//!
//! whose coefficients are reported multiplied by `1 + lambda2 / n`. The
//! intercept `b` is never penalized and never rescaled.

mod cv;
pub(crate) mod design;
mod logistic;
mod ols;
mod path;
mod weights;

pub use cv::{cross_validate, fold_assignment, CvResult};
pub use design::{standardize, DesignMatrix};
pub use logistic::{
    fit_enet_logistic, fit_enet_logistic_with, logistic_objective, EnetFit, SolverOptions,
    WarmStart,
};
pub use ols::{fit_ols, OlsFit};
pub use path::{lambda_max, lambda_path, LambdaPath};
pub use weights::{compute_weights, AdaptiveWeights, PenaltySpec, W_MAX};

/// Probability clipping bound used in deviances and working weights.
pub const PROB_EPS: f64 = 1e-12;

#[inline]
pub(crate) fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn clip_prob(p: f64) -> f64 {
    p.clamp(PROB_EPS, 1.0 - PROB_EPS)
}

/// `log(1 + exp(eta))` without overflow.
#[inline]
pub(crate) fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

/// Checks that `a` is a 0/1 vector of length `n` holding both classes.
/// Returns the treated count.
pub(crate) fn check_treatment(a: &[u8], n: usize) -> crate::Result<usize> {
    if a.len() != n {
        return Err(crate::Error::Dimension(format!(
            "treatment has length {}, design has {} rows",
            a.len(),
            n
        )));
    }
    if let Some((row, &v)) = a.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(crate::Error::NonBinaryTreatment {
            row,
            value: v.to_string(),
        });
    }
    let treated = a.iter().filter(|&&v| v == 1).count();
    if treated == 0 || treated == n {
        return Err(crate::Error::SingleClass {
            treated,
            control: n - treated,
        });
    }
    Ok(treated)
}

/// Binomial deviance `-2 sum[a log p + (1-a) log(1-p)]` with clipped probabilities.
pub fn binomial_deviance(a: &[u8], probs: &[f64]) -> f64 {
    -2.0 * a
        .iter()
        .zip(probs)
        .map(|(&ai, &p)| {
            let p = clip_prob(p);
            if ai == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            }
        })
        .sum::<f64>()
}
