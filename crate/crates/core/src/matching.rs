//! Propensity scores on a selected covariate set, greedy 1:1 nearest-neighbour
//! matching, and the ATT over matched pairs.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::oaenet::Dataset;
use crate::penalized_glm::{
    clip_prob, fit_enet_logistic, AdaptiveWeights, EnetFit, PenaltySpec, PROB_EPS,
};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// Ridge level used when the unpenalized propensity model does not converge.
pub const SEPARATION_RIDGE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityScores {
    /// Clipped to `[1e-12, 1 - 1e-12]`.
    pub scores: Vec<f64>,
    pub intercept: f64,
    /// One coefficient per entry of `selected`.
    pub model_coefficients: Vec<f64>,
    pub selected: Vec<usize>,
    /// Set when the MLE did not exist (separation) and the ridge fallback was used.
    pub ridge_fallback: bool,
}

/// Unpenalized logistic propensity model on the `selected` columns.
pub fn fit_propensity(data: &Dataset, selected: &[usize]) -> Result<PropensityScores> {
    let mut cols = selected.to_vec();
    cols.sort_unstable();
    cols.dedup();
    let n = data.n();
    if cols.is_empty() {
        let treated = data.treated_count() as f64;
        let share = treated / n as f64;
        return Ok(PropensityScores {
            scores: vec![clip_prob(share); n],
            intercept: (share / (1.0 - share)).ln(),
            model_coefficients: Vec::new(),
            selected: cols,
            ridge_fallback: false,
        });
    }
    let x = data.x.select_columns(&cols)?;
    let p = cols.len();
    let mut fit = fit_enet_logistic(&x, &data.a, &PenaltySpec::unpenalized(p), None)?;
    let mut ridge_fallback = false;
    if !fit.converged {
        let ridge = PenaltySpec::new(0.0, SEPARATION_RIDGE, AdaptiveWeights::unit(p))?;
        fit = fit_enet_logistic(&x, &data.a, &ridge, None)?;
        ridge_fallback = true;
    }
    Ok(scores_from(&fit, &x, cols, ridge_fallback))
}

fn scores_from(
    fit: &EnetFit,
    x: &crate::DesignMatrix,
    selected: Vec<usize>,
    ridge_fallback: bool,
) -> PropensityScores {
    PropensityScores {
        scores: fit
            .predict_proba(x.values())
            .iter()
            .map(|&p| clip_prob(p))
            .collect(),
        intercept: fit.intercept,
        model_coefficients: fit.raw_coefficients.to_vec(),
        selected,
        ridge_fallback,
    }
}

/// Scale on which score distances are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DistanceScale {
    #[default]
    Probability,
    Logit,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchOptions {
    pub with_replacement: bool,
    /// Maximum distance, in units of `scale`.
    pub caliper: Option<f64>,
    pub scale: DistanceScale,
    /// Read `caliper` as a multiple of the standard deviation of the scores
    /// on `scale` (e.g. 0.2 with `Logit`).
    pub caliper_in_sd: bool,
}

impl MatchOptions {
    /// 1:1 without replacement on the logit scale with a caliper of 0.2
    /// standard deviations of the logit score.
    pub fn logit_caliper() -> Self {
        MatchOptions {
            with_replacement: false,
            caliper: Some(0.2),
            scale: DistanceScale::Logit,
            caliper_in_sd: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedSet {
    /// `(treated, control)` row indices in processing order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_treated: Vec<usize>,
    pub with_replacement: bool,
    /// Effective caliper on the distance scale.
    pub caliper: Option<f64>,
    /// Order in which treated units were processed.
    pub order: Vec<usize>,
}

/// Greedy nearest-neighbour matching.
///
/// Treated units are visited in a seeded random order; each takes the
/// closest still-eligible control (lowest index on ties). A treated unit
/// with no eligible control within the caliper is left unmatched.
pub fn match_nearest_neighbor(
    scores: &[f64],
    a: &[u8],
    options: &MatchOptions,
    seed: u64,
) -> Result<MatchedSet> {
    if scores.len() != a.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} units",
            scores.len(),
            a.len()
        )));
    }
    if let Some(c) = options.caliper {
        if !(c >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "caliper must be non-negative, got {c}"
            )));
        }
    }
    let mut treated: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 1).collect();
    let controls: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 0).collect();
    if treated.is_empty() || controls.is_empty() {
        return Err(Error::SingleClass {
            treated: treated.len(),
            control: controls.len(),
        });
    }
    let position: Vec<f64> = match options.scale {
        DistanceScale::Probability => scores.to_vec(),
        DistanceScale::Logit => scores
            .iter()
            .map(|&s| {
                let s = s.clamp(PROB_EPS, 1.0 - PROB_EPS);
                (s / (1.0 - s)).ln()
            })
            .collect(),
    };

    let caliper = match options.caliper {
        Some(c) if options.caliper_in_sd => {
            let n = position.len() as f64;
            let mean = position.iter().sum::<f64>() / n;
            let var = position.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Some(c * var.sqrt())
        }
        other => other,
    };

    treated.shuffle(&mut stream_rng(seed, Stream::MatchOrder));
    let mut used = vec![false; controls.len()];
    let mut pairs = Vec::with_capacity(treated.len());
    let mut unmatched = Vec::new();
    for &t in &treated {
        let mut best: Option<(usize, f64)> = None;
        for (k, &c) in controls.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = (position[t] - position[c]).abs();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        match best {
            Some((k, d)) if caliper.is_none_or(|c| d <= c) => {
                if !options.with_replacement {
                    used[k] = true;
                }
                pairs.push((t, controls[k]));
            }
            _ => unmatched.push(t),
        }
    }
    Ok(MatchedSet {
        pairs,
        unmatched_treated: unmatched,
        with_replacement: options.with_replacement,
        caliper,
        order: treated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttEstimate {
    pub att: f64,
    pub n_pairs: usize,
    pub pair_differences: Vec<f64>,
}

pub fn estimate_att(matched: &MatchedSet, y: &[f64]) -> Result<AttEstimate> {
    if matched.pairs.is_empty() {
        return Err(Error::NoOverlap);
    }
    let mut diffs = Vec::with_capacity(matched.pairs.len());
    for &(t, c) in &matched.pairs {
        if t >= y.len() || c >= y.len() {
            return Err(Error::Dimension(format!(
                "pair ({t}, {c}) out of range for {} outcomes",
                y.len()
            )));
        }
        diffs.push(y[t] - y[c]);
    }
    let att = diffs.iter().sum::<f64>() / diffs.len() as f64;
    Ok(AttEstimate {
        att,
        n_pairs: diffs.len(),
        pair_differences: diffs,
    })
}
