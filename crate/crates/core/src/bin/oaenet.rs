use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use oaenet::harness::{
    ingest_dataset, run_experiment, write_dataset_csv, write_report, ExperimentConfig, MethodKind,
};
use oaenet::matching::{
    estimate_att, fit_propensity, match_nearest_neighbor, DistanceScale, MatchOptions,
};
use oaenet::oaenet::{outcome_adaptive_lasso, select_variables, GridConfig};
use oaenet::simulation::{builtin_scenario, generate_raw, ScenarioSpec};
use oaenet::{Error, Result};

#[derive(Parser)]
#[command(name = "oaenet", version, about = "Outcome adaptive elastic net variable selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment on a scenario and write the report files.
    Simulate(SimulateArgs),
    /// Select covariates for the propensity model of a CSV dataset (JSON to stdout).
    Select(SelectArgs),
    /// Match on a propensity model over given covariates and report the ATT (JSON to stdout).
    Match(MatchArgs),
    /// Write one scenario draw as CSV.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in scenario label (1A, 1B, 2A, 2B) or path to a scenario JSON file.
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 1000)]
    replications: usize,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of OAENet, OLas, Targ, Conf, PotConf.
    #[arg(long, value_delimiter = ',', default_value = "OAENet,OLas,Targ,Conf,PotConf")]
    methods: Vec<String>,
    /// Output directory.
    #[arg(long, env = "OAENET_OUTPUT_DIR")]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Override the scenario's sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated lambda2 levels of the penalty grid.
    #[arg(long, value_delimiter = ',')]
    lambda2: Option<Vec<f64>>,
    #[arg(long)]
    lambda1_count: Option<usize>,
    #[command(flatten)]
    matching: MatchFlags,
}

#[derive(Args)]
struct DataFlags {
    /// Dataset CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the 0/1 treatment column.
    #[arg(long)]
    treatment: String,
    /// Name of the outcome column.
    #[arg(long)]
    outcome: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectMethod {
    Oaenet,
    Olas,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    data: DataFlags,
    #[arg(long, default_value_t = 3.0)]
    gamma: f64,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "oaenet")]
    method: SelectMethod,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scale {
    Probability,
    Logit,
}

#[derive(Args)]
struct MatchFlags {
    #[arg(long)]
    with_replacement: bool,
    #[arg(long)]
    caliper: Option<f64>,
    /// Interpret --caliper in standard deviations of the score.
    #[arg(long)]
    caliper_sd: bool,
    #[arg(long, value_enum, default_value = "probability")]
    scale: Scale,
}

impl MatchFlags {
    fn options(&self) -> MatchOptions {
        MatchOptions {
            with_replacement: self.with_replacement,
            caliper: self.caliper,
            caliper_in_sd: self.caliper_sd,
            scale: match self.scale {
                Scale::Probability => DistanceScale::Probability,
                Scale::Logit => DistanceScale::Logit,
            },
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    data: DataFlags,
    /// Comma-separated covariate names to include in the propensity model.
    #[arg(long, value_delimiter = ',')]
    selected: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    matching: MatchFlags,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

fn load_scenario(arg: &str, n: Option<usize>) -> Result<ScenarioSpec> {
    let path = Path::new(arg);
    let mut spec = if path.exists() {
        ScenarioSpec::load(path)?
    } else {
        builtin_scenario(arg)?
    };
    if let Some(n) = n {
        spec.n = n;
    }
    spec.validate()?;
    Ok(spec)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let scenario = load_scenario(&args.scenario, args.n)?;
    let methods = args
        .methods
        .iter()
        .filter(|m| !m.trim().is_empty())
        .map(|m| m.parse::<MethodKind>())
        .collect::<Result<Vec<_>>>()?;
    let mut grid = GridConfig::default();
    if let Some(l2) = args.lambda2 {
        grid.lambda2_values = l2;
    }
    if let Some(c) = args.lambda1_count {
        grid.lambda1_count = c;
    }
    let config = ExperimentConfig {
        replications: args.replications,
        methods,
        gamma: args.gamma,
        k_folds: args.folds,
        grid,
        matching: args.matching.options(),
        root_seed: args.seed,
        threads: args.threads,
        output_dir: Some(args.out.clone()),
        ..ExperimentConfig::new(scenario)
    };
    // validate before touching the output directory
    config.resolved()?;
    let report = run_experiment(&config)?;
    let paths = write_report(&report, &args.out)?;
    for s in &report.summary {
        eprintln!(
            "{:<8} mean_att={:.4} bias={:+.4} var={:.5} failures={}",
            s.method.name(),
            s.mean_att,
            s.bias,
            s.variance,
            s.failures
        );
    }
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Serialize)]
struct SelectOutput<'a> {
    method: String,
    selected: &'a [usize],
    selected_names: Vec<&'a str>,
    lambda1: f64,
    lambda2: f64,
    gamma: f64,
    intercept: f64,
    coefficients: Vec<f64>,
    outcome_coefficients: Vec<f64>,
    adaptive_weights: Vec<f64>,
    converged: bool,
}

fn select(args: SelectArgs) -> Result<()> {
    let data = ingest_dataset(&args.data.data, &args.data.treatment, &args.data.outcome)?;
    let grid = GridConfig::default();
    let result = match args.method {
        SelectMethod::Oaenet => select_variables(&data, args.gamma, args.folds, &grid, args.seed)?,
        SelectMethod::Olas => {
            outcome_adaptive_lasso(&data, args.gamma, args.folds, &grid, args.seed)?
        }
    };
    let out = SelectOutput {
        method: result.method.to_string(),
        selected: &result.selected,
        selected_names: result.selected_names(&data.x),
        lambda1: result.cv.selected.0,
        lambda2: result.cv.selected.1,
        gamma: result.gamma,
        intercept: result.enet.intercept,
        coefficients: result.enet.coefficients.to_vec(),
        outcome_coefficients: result.ols.coefficients.to_vec(),
        adaptive_weights: result.weights.weights.to_vec(),
        converged: result.enet.converged,
    };
    emit(&out, args.out.as_deref())
}

#[derive(Serialize)]
struct MatchOutput {
    att: f64,
    n_pairs: usize,
    unmatched_treated: usize,
    ridge_fallback: bool,
    selected: Vec<String>,
}

fn run_match(args: MatchArgs) -> Result<()> {
    let data = ingest_dataset(&args.data.data, &args.data.treatment, &args.data.outcome)?;
    let names = data.x.column_names();
    let columns = args
        .selected
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            names
                .iter()
                .position(|n| n == s.trim())
                .ok_or_else(|| Error::MissingColumn(s.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ps = fit_propensity(&data, &columns)?;
    let matched = match_nearest_neighbor(&ps.scores, &data.a, &args.matching.options(), args.seed)?;
    let est = estimate_att(&matched, data.y.as_slice().expect("contiguous"))?;
    emit(
        &MatchOutput {
            att: est.att,
            n_pairs: est.n_pairs,
            unmatched_treated: matched.unmatched_treated.len(),
            ridge_fallback: ps.ridge_fallback,
            selected: ps.selected.iter().map(|&j| names[j].clone()).collect(),
        },
        None,
    )
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let spec = load_scenario(&args.scenario, args.n)?;
    let draw = generate_raw(&spec, args.seed)?;
    write_dataset_csv(
        &args.out,
        draw.x.view(),
        &draw.column_names(),
        &draw.a,
        draw.y.as_slice().expect("contiguous"),
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Select(a) => select(a),
        Command::Match(a) => run_match(a),
        Command::Generate(a) => run_generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {}", e.kind(), msg);
            ExitCode::FAILURE
        }
    }
}
