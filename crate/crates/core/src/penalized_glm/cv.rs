use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logistic::{solve, Problem};
use super::{
    binomial_deviance, check_treatment, sigmoid, AdaptiveWeights, DesignMatrix, SolverOptions,
    WarmStart,
};
use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    /// `(lambda1, lambda2)` pairs in caller order.
    pub grid: Vec<(f64, f64)>,
    /// Mean over folds of the held-out deviance per observation.
    pub mean_cv_loss: Vec<f64>,
    pub se_cv_loss: Vec<f64>,
    pub selected: (f64, f64),
    pub selected_index: usize,
    pub fold_count: usize,
    /// Fold id of every row.
    pub folds: Vec<usize>,
}

fn stratified(a: &[u8], k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut treated: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 1).collect();
    let mut control: Vec<usize> = (0..a.len()).filter(|&i| a[i] == 0).collect();
    treated.shuffle(rng);
    control.shuffle(rng);
    let mut folds = vec![0; a.len()];
    for (pos, &i) in treated.iter().chain(control.iter()).enumerate() {
        folds[i] = pos % k;
    }
    folds
}

/// First fold whose training rows miss a treatment class.
fn broken_fold(a: &[u8], folds: &[usize], k: usize) -> Option<(usize, &'static str)> {
    let total_treated = a.iter().filter(|&&v| v == 1).count();
    let total_control = a.len() - total_treated;
    (0..k).find_map(|f| {
        let treated_in = (0..a.len()).filter(|&i| folds[i] == f && a[i] == 1).count();
        let control_in = (0..a.len()).filter(|&i| folds[i] == f && a[i] == 0).count();
        if treated_in == total_treated {
            Some((f, "treated"))
        } else if control_in == total_control {
            Some((f, "control"))
        } else {
            None
        }
    })
}

/// Treatment-stratified fold ids drawn from the fold stream of `seed`.
pub fn fold_assignment(a: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Folds);
    let mut folds = stratified(a, k, &mut rng);
    if broken_fold(a, &folds, k).is_some() {
        folds = stratified(a, k, &mut rng);
        if let Some((fold, missing)) = broken_fold(a, &folds, k) {
            return Err(Error::FoldClassMissing { fold, missing });
        }
    }
    Ok(folds)
}

/// k-fold cross-validation of the weighted elastic-net logistic model over
/// `grid`, scored by held-out binomial deviance. Within each fold the grid
/// is visited per `lambda2` level in decreasing `lambda1`, warm-starting
/// each fit from the previous one.
pub fn cross_validate(
    x: &DesignMatrix,
    a: &[u8],
    weights: &AdaptiveWeights,
    grid: &[(f64, f64)],
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    let n = x.nrows();
    check_treatment(a, n)?;
    if grid.is_empty() {
        return Err(Error::InvalidParameter("penalty grid is empty".into()));
    }
    if k < 2 || n < 2 * k {
        return Err(Error::InvalidParameter(format!(
            "{k}-fold cross-validation needs k >= 2 and n >= 2k (n = {n})"
        )));
    }
    if weights.len() != x.ncols() {
        return Err(Error::Dimension(format!(
            "{} adaptive weights for {} columns",
            weights.len(),
            x.ncols()
        )));
    }
    if let Some(&(l1, l2)) = grid
        .iter()
        .find(|(l1, l2)| !(l1.is_finite() && *l1 >= 0.0 && l2.is_finite() && *l2 >= 0.0))
    {
        return Err(Error::InvalidParameter(format!(
            "grid point ({l1}, {l2}) is not a pair of finite non-negative penalties"
        )));
    }

    let folds = fold_assignment(a, k, seed)?;
    let order = visit_order(grid);
    let w = weights.weights.to_vec();
    let xv = x.values();
    let options = SolverOptions::default();

    let per_fold: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
            let prob = Problem::rows(xv, a, &train);
            let test_a: Vec<u8> = test.iter().map(|&i| a[i]).collect();
            let mut losses = vec![0.0; grid.len()];
            let mut start: Option<WarmStart> = None;
            let mut last_l2: Option<f64> = None;
            for &g in &order {
                let (l1, l2) = grid[g];
                if last_l2 != Some(l2) {
                    start = None;
                    last_l2 = Some(l2);
                }
                let fit = solve(&prob, l1, l2, &w, start.as_ref(), &options);
                let probs: Vec<f64> = test
                    .iter()
                    .map(|&i| {
                        let eta = fit.intercept
                            + xv.row(i)
                                .iter()
                                .zip(fit.raw_coefficients.iter())
                                .map(|(x, c)| x * c)
                                .sum::<f64>();
                        sigmoid(eta)
                    })
                    .collect();
                losses[g] = binomial_deviance(&test_a, &probs) / test.len() as f64;
                start = Some(fit.warm_start());
            }
            losses
        })
        .collect();

    let kf = k as f64;
    let mut mean = vec![0.0; grid.len()];
    let mut se = vec![0.0; grid.len()];
    for g in 0..grid.len() {
        let m = per_fold.iter().map(|l| l[g]).sum::<f64>() / kf;
        let var = per_fold.iter().map(|l| (l[g] - m).powi(2)).sum::<f64>() / (kf - 1.0);
        mean[g] = m;
        se[g] = (var / kf).sqrt();
    }

    let mut best = 0;
    for g in 1..grid.len() {
        let (l1, l2) = grid[g];
        let (b1, b2) = grid[best];
        let better = mean[g] < mean[best]
            || (mean[g] == mean[best] && (l1 > b1 || (l1 == b1 && l2 > b2)));
        if better {
            best = g;
        }
    }

    Ok(CvResult {
        grid: grid.to_vec(),
        mean_cv_loss: mean,
        se_cv_loss: se,
        selected: grid[best],
        selected_index: best,
        fold_count: k,
        folds,
    })
}

/// Grid indices grouped by `lambda2` (first-appearance order), each group in
/// decreasing `lambda1`.
fn visit_order(grid: &[(f64, f64)]) -> Vec<usize> {
    let mut levels: Vec<f64> = Vec::new();
    for &(_, l2) in grid {
        if !levels.contains(&l2) {
            levels.push(l2);
        }
    }
    let mut order = Vec::with_capacity(grid.len());
    for l2 in levels {
        let mut group: Vec<usize> = (0..grid.len()).filter(|&g| grid[g].1 == l2).collect();
        group.sort_by(|&i, &j| grid[j].0.total_cmp(&grid[i].0).then(i.cmp(&j)));
        order.extend(group);
    }
    order
}
