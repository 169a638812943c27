use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::OlsFit;
use crate::{Error, Result};

/// Upper bound on an adaptive weight. A zero outcome coefficient maps here
/// instead of to infinity.
pub const W_MAX: f64 = 1e8;

/// Per-coefficient L1 penalty multipliers `min(|beta_j|^-gamma, cap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveWeights {
    pub gamma: f64,
    pub weights: Array1<f64>,
    pub cap: f64,
}

impl AdaptiveWeights {
    /// All-ones weights, i.e. the plain elastic net.
    pub fn unit(p: usize) -> Self {
        AdaptiveWeights {
            gamma: 1.0,
            weights: Array1::ones(p),
            cap: W_MAX,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn at_cap(&self) -> usize {
        self.weights.iter().filter(|&&w| w >= self.cap).count()
    }
}

pub fn compute_weights(ols: &OlsFit, gamma: f64, cap: f64) -> Result<AdaptiveWeights> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    if !(cap > 0.0 && cap.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "weight cap must be positive and finite, got {cap}"
        )));
    }
    let weights = ols
        .coefficients
        .mapv(|b| b.abs().powf(-gamma).min(cap));
    Ok(AdaptiveWeights {
        gamma,
        weights,
        cap,
    })
}

/// Penalty levels of the weighted elastic net.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub lambda1: f64,
    pub lambda2: f64,
    pub weights: AdaptiveWeights,
}

impl PenaltySpec {
    pub fn new(lambda1: f64, lambda2: f64, weights: AdaptiveWeights) -> Result<Self> {
        for (name, v) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(PenaltySpec {
            lambda1,
            lambda2,
            weights,
        })
    }

    /// `lambda1 = lambda2 = 0` with unit weights: the logistic MLE.
    pub fn unpenalized(p: usize) -> Self {
        PenaltySpec {
            lambda1: 0.0,
            lambda2: 0.0,
            weights: AdaptiveWeights::unit(p),
        }
    }

    /// Coefficient rescaling factor `1 + lambda2 / n`.
    pub fn rescale_factor(&self, n: usize) -> f64 {
        1.0 + self.lambda2 / n as f64
    }
}
