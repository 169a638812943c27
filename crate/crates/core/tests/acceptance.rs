//! End-to-end acceptance checks. Each test reports one PASS/FAIL line on
//! stderr (written directly so the harness does not capture it) and then
//! asserts the same condition.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::Instant;

use common::*;
use ndarray::Array1;
use oaenet::harness::{run_experiment, write_report, ExperimentConfig, MethodKind, MonteCarloReport};
use oaenet::matching::{estimate_att, match_nearest_neighbor, MatchOptions};
use oaenet::oaenet::{outcome_adaptive_lasso, select_variables, GridConfig};
use oaenet::penalized_glm::{fit_enet_logistic, lambda_max, AdaptiveWeights, PenaltySpec};
use oaenet::simulation::{builtin_scenario, generate, ScenarioSpec};
use oaenet::DesignMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "criterion {criterion}: {verdict} - {detail}");
}

fn weights_of(w: &[f64]) -> AdaptiveWeights {
    AdaptiveWeights {
        weights: Array1::from(w.to_vec()),
        ..AdaptiveWeights::unit(w.len())
    }
}

#[test]
fn criterion_1_kkt_on_random_instances() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_ratio = 0.0f64;
    let mut failures = Vec::new();
    for case in 0..100 {
        let n = rng.random_range(50..=500);
        let p = rng.random_range(2..=50);
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0) / (p as f64).sqrt()).collect();
        let (x, a) = logistic_instance(n, &beta, rng.random_range(-0.5..0.5), rng.random());
        if a.iter().all(|&v| v == a[0]) {
            continue;
        }
        let w: Vec<f64> = (0..p).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
        let dm = DesignMatrix::new(x.clone()).unwrap();
        let lmax = lambda_max(&dm, &a, &weights_of(&w)).unwrap();
        let l1 = lmax * 10f64.powf(rng.random_range(-2.0..0.2));
        let l2 = rng.random_range(0.0..10.0);
        let fit = fit_enet_logistic(&dm, &a, &PenaltySpec::new(l1, l2, weights_of(&w)).unwrap(), None)
            .unwrap();
        let v = kkt_violation(x.view(), &a, l1, l2, &w, fit.intercept, &fit.raw_coefficients);
        worst_ratio = worst_ratio.max(v / n as f64);
        if !fit.converged || v > 1e-5 * n as f64 {
            failures.push(case);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    report(
        1,
        pass,
        &format!(
            "100 instances, worst violation/n {worst_ratio:.2e} (tol 1e-5), failing {failures:?}, {secs:.1}s"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut newton_cases = 0;
    let mut worst_newton = 0.0f64;
    while newton_cases < 20 {
        let n = rng.random_range(100..=400);
        let p = rng.random_range(2..=8);
        let beta: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (x, a) = logistic_instance(n, &beta, rng.random_range(-0.5..0.5), rng.random());
        // separable draws have no MLE; the oracle rejects them
        let Some((b0, coef)) = newton_logistic(x.view(), &a) else { continue };
        let dm = DesignMatrix::new(x).unwrap();
        let fit = fit_enet_logistic(&dm, &a, &PenaltySpec::unpenalized(p), None).unwrap();
        worst_newton = worst_newton.max((fit.intercept - b0).abs());
        for j in 0..p {
            worst_newton = worst_newton.max((fit.coefficients[j] - coef[j]).abs());
        }
        newton_cases += 1;
    }

    let mut worst_grid = 0.0f64;
    for _ in 0..10 {
        let beta = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let (x, a) = logistic_instance(60, &beta, rng.random_range(-0.3..0.3), rng.random());
        let w = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
        let l1 = rng.random_range(0.1..3.0);
        let l2 = rng.random_range(0.1..2.0);
        let target = grid_search_2d(x.view(), &a, l1, l2, &w);
        let dm = DesignMatrix::new(x).unwrap();
        let fit = fit_enet_logistic(&dm, &a, &PenaltySpec::new(l1, l2, weights_of(&w)).unwrap(), None)
            .unwrap();
        for j in 0..2 {
            worst_grid = worst_grid.max((fit.raw_coefficients[j] - target[j]).abs());
        }
    }
    let pass = worst_newton <= 1e-5 && worst_grid <= 2e-3;
    report(
        2,
        pass,
        &format!(
            "Newton max abs diff {worst_newton:.2e} (tol 1e-5) over 20; grid max abs diff {worst_grid:.2e} (tol 2e-3) over 10"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_3_lasso_reduction() {
    let grid = GridConfig {
        lambda1_count: 25,
        ..GridConfig::default()
    };
    let lasso_grid = grid.lasso_only();
    let mut mismatches = Vec::new();
    for seed in 0..10 {
        let spec = ScenarioSpec {
            n: 200,
            p: 12,
            ..builtin_scenario(if seed % 2 == 0 { "2A" } else { "2B" }).unwrap()
        };
        let data = generate(&spec, 300 + seed).unwrap();
        let enet = select_variables(&data, 3.0, 5, &lasso_grid, seed).unwrap();
        let olas = outcome_adaptive_lasso(&data, 3.0, 5, &grid, seed).unwrap();
        let same = enet.selected == olas.selected
            && enet.ols == olas.ols
            && enet.weights == olas.weights
            && enet.enet == olas.enet
            && enet.cv == olas.cv
            && enet.gamma == olas.gamma;
        if !same {
            mismatches.push(seed);
        }
    }
    let pass = mismatches.is_empty();
    report(3, pass, &format!("10 datasets, mismatching seeds {mismatches:?}"));
    assert!(pass);
}

/// The shared Scenario 2A run: 200 replications, default grid, gamma 3,
/// 5-fold CV, 1:1 matching without replacement within 0.2 SD of the logit
/// score.
fn scenario_2a() -> &'static (MonteCarloReport, f64) {
    static RUN: OnceLock<(MonteCarloReport, f64)> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let config = ExperimentConfig {
            replications: 200,
            methods: vec![MethodKind::OAENet, MethodKind::Targ, MethodKind::PotConf],
            matching: MatchOptions::logit_caliper(),
            ..ExperimentConfig::new(builtin_scenario("2A").unwrap())
        };
        let report = run_experiment(&config).unwrap();
        (report, start.elapsed().as_secs_f64())
    })
}

#[test]
fn criterion_4_scenario_2a_selection_and_att() {
    let (rep, secs) = scenario_2a();
    let props = rep.proportions_for(MethodKind::OAENet).unwrap();
    let core_min = props[..4].iter().cloned().fold(f64::INFINITY, f64::min);
    let spurious = props[8..].iter().sum::<f64>() / props[8..].len() as f64;
    let oaenet = rep.summary_for(MethodKind::OAENet).unwrap();
    let targ = rep.summary_for(MethodKind::Targ).unwrap();
    let pass_a = core_min >= 0.9 && spurious <= 0.2;
    let pass_b =
        (oaenet.mean_att - 1.0).abs() <= 0.1 && (oaenet.mean_att - targ.mean_att).abs() <= 0.05;
    report(
        4,
        pass_a && pass_b,
        &format!(
            "(a) min X1..X4 rate {core_min:.3}, spurious rate {spurious:.4}; (b) mean ATT OAENet {:.4} (failures {}), Targ {:.4}, diff {:+.4}; {secs:.0}s",
            oaenet.mean_att,
            oaenet.failures,
            targ.mean_att,
            oaenet.mean_att - targ.mean_att
        ),
    );
    assert!(pass_a, "selection part failed");
    assert!(pass_b, "ATT part failed");
}

#[test]
fn criterion_5_scenario_1b_viability() {
    let start = Instant::now();
    let config = ExperimentConfig {
        replications: 100,
        methods: vec![MethodKind::OAENet],
        matching: MatchOptions::logit_caliper(),
        ..ExperimentConfig::new(builtin_scenario("1B").unwrap())
    };
    let rep = run_experiment(&config).unwrap();
    let s = rep.summary_for(MethodKind::OAENet).unwrap();
    let pass = s.failures == 0 && s.mean_selected < 40.0;
    report(
        5,
        pass,
        &format!(
            "failures {}, mean selected {:.2} of 100, {:.0}s",
            s.failures,
            s.mean_selected,
            start.elapsed().as_secs_f64()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_treatment_predictors_inflate_variance() {
    let (rep, _) = scenario_2a();
    let pot = rep.summary_for(MethodKind::PotConf).unwrap();
    let targ = rep.summary_for(MethodKind::Targ).unwrap();
    let pass = pot.variance >= targ.variance;
    report(
        6,
        pass,
        &format!("var PotConf {:.4} vs var Targ {:.4}", pot.variance, targ.variance),
    );
    assert!(pass);
}

fn replay_with_replacement(scores: &[f64], a: &[u8], order: &[usize]) -> Vec<(usize, usize)> {
    order
        .iter()
        .filter_map(|&t| {
            (0..a.len())
                .filter(|&c| a[c] == 0)
                .fold(None, |best: Option<usize>, c| match best {
                    Some(b) if (scores[t] - scores[b]).abs() <= (scores[t] - scores[c]).abs() => Some(b),
                    _ => Some(c),
                })
                .map(|c| (t, c))
        })
        .collect()
}

#[test]
fn criterion_7_matching_micro_oracle() {
    let levels = [0.2, 0.4, 0.6];
    let mut datasets = 0usize;
    let mut mismatches = 0usize;
    let mut att_mismatches = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    for n in 2..=6usize {
        for mask in 1..(1u32 << n) - 1 {
            let a: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
            for code in 0..3usize.pow(n as u32) {
                let scores: Vec<f64> = (0..n).map(|i| levels[(code / 3usize.pow(i as u32)) % 3]).collect();
                let y: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
                datasets += 1;
                for (replace, seed) in [(false, code as u64), (true, mask as u64)] {
                    let opts = MatchOptions {
                        with_replacement: replace,
                        ..MatchOptions::default()
                    };
                    let m = match_nearest_neighbor(&scores, &a, &opts, seed).unwrap();
                    let mut order = m.order.clone();
                    order.sort_unstable();
                    let treated: Vec<usize> = (0..n).filter(|&i| a[i] == 1).collect();
                    let expected = if replace {
                        replay_with_replacement(&scores, &a, &m.order)
                    } else {
                        replay_greedy(&scores, &a, &m.order)
                    };
                    let gap: f64 = m.pairs.iter().map(|&(t, c)| (scores[t] - scores[c]).abs()).sum();
                    let sane = replace || gap + 1e-12 >= optimal_total_gap(&scores, &a);
                    if order != treated || m.pairs != expected || !sane {
                        mismatches += 1;
                    }
                    let est = estimate_att(&m, &y).unwrap();
                    let direct = m.pairs.iter().map(|&(t, c)| y[t] - y[c]).sum::<f64>()
                        / m.pairs.len() as f64;
                    if est.att != direct || est.n_pairs != m.pairs.len() {
                        att_mismatches += 1;
                    }
                }
            }
        }
    }
    let pass = mismatches == 0 && att_mismatches == 0;
    report(
        7,
        pass,
        &format!(
            "{datasets} datasets x 2 modes, matching mismatches {mismatches}, ATT mismatches {att_mismatches}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_8_byte_identical_outputs() {
    let scenario = ScenarioSpec {
        n: 300,
        p: 20,
        ..builtin_scenario("2B").unwrap()
    };
    let config = ExperimentConfig {
        replications: 4,
        methods: MethodKind::ALL.to_vec(),
        grid: GridConfig {
            lambda1_count: 15,
            ..GridConfig::default()
        },
        root_seed: 88,
        ..ExperimentConfig::new(scenario)
    };
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let mut outputs = Vec::new();
    for (i, dir) in dirs.iter().enumerate() {
        let cfg = ExperimentConfig {
            threads: Some(i + 1),
            ..config.clone()
        };
        let paths = write_report(&run_experiment(&cfg).unwrap(), dir.path()).unwrap();
        outputs.push(paths.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    let pass = outputs.windows(2).all(|w| w[0] == w[1]);
    report(
        8,
        pass,
        "3 reruns (1, 2, 3 threads, separate directories): all 4 report files byte-identical",
    );
    assert!(pass);
}
