//! Command-line harness for the boundary-integral solver and its baselines.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pibinet::cli::{
    self, benchmark::BenchmarkConfig, gen_data::GenDataConfig, train_cmd::TrainCmdConfig,
    wells::WellsConfig, Method, Region, SourceSetup,
};
use pibinet::error::{Error, Result};
use pibinet::fd::SourceDiscretization;
use pibinet::geometry::SamplingMode;
use pibinet::training::LossReduction;

#[derive(Parser)]
#[command(
    name = "pibinet",
    version,
    about = "Data-assimilating Laplace/Poisson solver: boundary-integral network, \
             finite-difference reference, and PINN baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its ground-truth grid.
    GenData(GenDataArgs),
    /// Train a model on a measurement CSV.
    Train(TrainArgs),
    /// Evaluate a trained model against a reference grid.
    Evaluate(EvaluateArgs),
    /// Run a benchmark sweep over datasets, methods and seeds.
    Benchmark(BenchmarkArgs),
    /// Fit well measurements with trainable pumping-well sources.
    Wells(WellsArgs),
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::InputData(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidConfig(format!("bad {what} entry {tok:?}")))
        })
        .collect()
}

fn parse_guesses(s: &str) -> Result<Vec<(f64, f64, f64)>> {
    s.split(';')
        .map(|tok| {
            let parts: Vec<&str> = tok.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::InvalidConfig(format!(
                    "source guess {tok:?} must be x,y,magnitude"
                )));
            }
            let num = |p: &str| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad number {p:?} in guess")))
            };
            Ok((num(parts[0])?, num(parts[1])?, num(parts[2])?))
        })
        .collect()
}

/// Flags shared by every training-backed command; each overrides the
/// config-file field of the same name.
#[derive(Args, Clone)]
struct TrainFlags {
    /// JSON config file mirroring the training field names.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Boundary-loss weight.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    adam_beta1: Option<f64>,
    #[arg(long)]
    adam_beta2: Option<f64>,
    #[arg(long)]
    adam_eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    integration_points: Option<usize>,
    #[arg(long)]
    epsilon_enlarge: Option<f64>,
    /// equispaced | random
    #[arg(long)]
    sampling_mode: Option<String>,
    /// Hidden layer widths, e.g. "64,64,64".
    #[arg(long)]
    hidden_layers: Option<String>,
    /// mean | sum
    #[arg(long)]
    loss_reduction: Option<String>,
    #[arg(long)]
    use_biases: Option<bool>,
}

impl TrainFlags {
    fn apply(&self, cfg: &mut pibinet::training::TrainConfig) -> Result<()> {
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.learning_rate = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.adam_beta1 {
            cfg.adam_beta1 = v;
        }
        if let Some(v) = self.adam_beta2 {
            cfg.adam_beta2 = v;
        }
        if let Some(v) = self.adam_eps {
            cfg.adam_eps = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.integration_points {
            cfg.integration_points = v;
        }
        if let Some(v) = self.epsilon_enlarge {
            cfg.epsilon_enlarge = v;
        }
        if let Some(v) = &self.sampling_mode {
            cfg.sampling_mode = match v.as_str() {
                "equispaced" => SamplingMode::Equispaced,
                "random" => SamplingMode::Random,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown sampling mode {other:?}"
                    )))
                }
            };
        }
        if let Some(v) = &self.hidden_layers {
            cfg.hidden_layers = parse_list(v, "hidden layer")?;
        }
        if let Some(v) = &self.loss_reduction {
            cfg.loss_reduction = match v.as_str() {
                "mean" => LossReduction::Mean,
                "sum" => LossReduction::Sum,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown loss reduction {other:?}"
                    )))
                }
            };
        }
        if let Some(v) = self.use_biases {
            cfg.use_biases = v;
        }
        Ok(())
    }
}

#[derive(Args)]
struct GenDataArgs {
    /// laplace_eq15 | poisson_random_sources
    #[arg(long)]
    scenario: Option<String>,
    /// theta_ring | full_omega
    #[arg(long)]
    region: Option<String>,
    /// Number of sampled measurements (the outlier is appended on top).
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise_std: Option<f64>,
    /// Ground-truth mesh spacing.
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    num_sources: Option<usize>,
    /// bilinear | gaussian:<sigma>
    #[arg(long)]
    source_mode: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// pibi | pinn
    #[arg(long)]
    method: String,
    /// Measurement CSV (header x1,x2,u).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long)]
    num_sources: Option<usize>,
    /// Initial guesses "x,y,c;x,y,c;...".
    #[arg(long)]
    source_guesses: Option<String>,
    #[arg(long)]
    train_source_locations: Option<bool>,
    #[arg(long)]
    train_source_magnitudes: Option<bool>,
    /// Collocation points (PINN physics term, or boundary term when
    /// --lambda > 0).
    #[arg(long)]
    collocation_count: Option<usize>,
    #[arg(long)]
    lambda_physics: Option<f64>,
    #[arg(long)]
    sigma_delta: Option<f64>,
    /// Comma-separated grid; triggers cross-validation for the PINN.
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Reference grid CSV used to score cross-validation candidates.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Evaluation grid spacing.
    #[arg(long, default_value_t = 0.02)]
    spacing: f64,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Comma-separated methods (default "pibi,pinn").
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated cells "count:region" (default the four-column table).
    #[arg(long)]
    cells: Option<String>,
    /// Comma-separated seeds (default 0..9).
    #[arg(long)]
    seeds: Option<String>,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long)]
    noise_std: Option<f64>,
    #[arg(long)]
    truth_spacing: Option<f64>,
    #[arg(long)]
    eval_spacing: Option<f64>,
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct WellsArgs {
    /// Well CSV (header id,x,y,head).
    #[arg(long)]
    wells: PathBuf,
    #[command(flatten)]
    train: TrainFlags,
    #[arg(long)]
    num_sources: Option<usize>,
    /// Initial guesses in user coordinates "x,y,c;...".
    #[arg(long)]
    source_guesses: Option<String>,
    #[arg(long)]
    eval_spacing: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone().unwrap_or_else(cli::default_out_dir)
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::GenData(args) => {
            let mut cfg: GenDataConfig = load_config(&args.config)?;
            if let Some(v) = &args.scenario {
                cfg.scenario = v.parse()?;
            }
            if let Some(v) = &args.region {
                cfg.region = v.parse()?;
            }
            if let Some(v) = args.count {
                cfg.count = v;
            }
            if let Some(v) = args.seed {
                cfg.seed = v;
            }
            if let Some(v) = args.noise_std {
                cfg.noise_std = v;
            }
            if let Some(v) = args.spacing {
                cfg.spacing = v;
            }
            if let Some(v) = args.num_sources {
                cfg.num_sources = v;
            }
            if let Some(v) = &args.source_mode {
                cfg.source_mode = if v == "bilinear" {
                    SourceDiscretization::Bilinear
                } else if let Some(sigma) = v.strip_prefix("gaussian:") {
                    SourceDiscretization::Gaussian {
                        sigma: sigma.parse().map_err(|_| {
                            Error::InvalidConfig(format!("bad gaussian width in {v:?}"))
                        })?,
                    }
                } else {
                    return Err(Error::InvalidConfig(format!("unknown source mode {v:?}")));
                };
            }
            let out = cli::gen_data(&cfg, &out_dir(&args.out_dir))?;
            println!(
                "wrote {} ({} rows) and {}",
                out.data_path.display(),
                out.dataset.len(),
                out.truth_path.display()
            );
            Ok(())
        }
        Command::Train(args) => {
            let mut cfg: TrainCmdConfig = load_config(&args.train.config)?;
            cfg.method = args.method.parse()?;
            args.train.apply(&mut cfg.train)?;
            if let Some(v) = args.num_sources {
                cfg.sources.num_sources = v;
                cfg.sources.train_locations = true;
                cfg.sources.train_magnitudes = true;
            }
            if let Some(v) = &args.source_guesses {
                cfg.sources.guesses = Some(parse_guesses(v)?);
            }
            if let Some(v) = args.train_source_locations {
                cfg.sources.train_locations = v;
            }
            if let Some(v) = args.train_source_magnitudes {
                cfg.sources.train_magnitudes = v;
            }
            if let Some(v) = args.collocation_count {
                cfg.collocation_count = v;
            }
            if let Some(v) = args.lambda_physics {
                cfg.lambda_physics = v;
            }
            if let Some(v) = args.sigma_delta {
                cfg.sigma_delta = v;
            }
            if let Some(v) = &args.lambda_grid {
                cfg.lambda_grid = parse_list(v, "lambda")?;
            }
            if let Some(v) = &args.truth {
                cfg.truth = Some(v.clone());
            }
            let out = cli::train_cmd(&cfg, &args.data, &out_dir(&args.out_dir))?;
            println!(
                "trained {} model: final loss {:.6e}; wrote {}",
                out.model.kind(),
                out.report.final_total_loss,
                out.model_path.display()
            );
            Ok(())
        }
        Command::Evaluate(args) => {
            let out = cli::evaluate_cmd(
                &args.model,
                &args.truth,
                args.spacing,
                &out_dir(&args.out_dir),
            )?;
            println!(
                "mae {:.6e} max {:.6e} over {} nodes ({} masked)",
                out.metrics.mae,
                out.metrics.max_abs_error,
                out.metrics.nodes,
                out.metrics.masked_nodes
            );
            Ok(())
        }
        Command::Benchmark(args) => {
            let mut cfg: BenchmarkConfig = load_config(&args.train.config)?;
            args.train.apply(&mut cfg.train)?;
            if args.methods.is_some() || args.cells.is_some() {
                let methods: Vec<Method> = match &args.methods {
                    Some(m) => parse_list(m, "method")?,
                    None => vec![Method::Pibi, Method::Pinn],
                };
                let cells: Vec<(usize, Region)> = match &args.cells {
                    Some(spec) => spec
                        .split(',')
                        .map(|tok| {
                            let (count, region) = tok.split_once(':').ok_or_else(|| {
                                Error::InvalidConfig(format!(
                                    "cell {tok:?} must be count:region"
                                ))
                            })?;
                            Ok((
                                count.trim().parse::<usize>().map_err(|_| {
                                    Error::InvalidConfig(format!("bad count in {tok:?}"))
                                })?,
                                region.trim().parse::<Region>()?,
                            ))
                        })
                        .collect::<Result<_>>()?,
                    None => vec![
                        (50, Region::ThetaRing),
                        (200, Region::ThetaRing),
                        (100, Region::FullOmega),
                        (500, Region::FullOmega),
                    ],
                };
                cfg.cells = methods
                    .iter()
                    .flat_map(|&method| {
                        cells.iter().map(move |&(count, region)| cli::BenchmarkCell {
                            method,
                            count,
                            region,
                        })
                    })
                    .collect();
            }
            if let Some(s) = &args.seeds {
                cfg.seeds = parse_list(s, "seed")?;
            }
            if let Some(v) = args.noise_std {
                cfg.noise_std = v;
            }
            if let Some(v) = args.truth_spacing {
                cfg.truth_spacing = v;
            }
            if let Some(v) = args.eval_spacing {
                cfg.eval_spacing = v;
            }
            if let Some(v) = &args.lambda_grid {
                cfg.lambda_grid = parse_list(v, "lambda")?;
            }
            if let Some(v) = args.workers {
                cfg.workers = v;
            }
            let out = cli::benchmark_cmd(&cfg, &out_dir(&args.out_dir))?;
            for row in &out.rows {
                println!(
                    "{} n={} {}: mae {:.4} +- {:.4}",
                    row.method, row.count, row.region, row.mean_mae, row.std_mae
                );
            }
            Ok(())
        }
        Command::Wells(args) => {
            let mut cfg: WellsConfig = load_config(&args.train.config)?;
            args.train.apply(&mut cfg.train)?;
            if let Some(v) = args.num_sources {
                cfg.sources = SourceSetup::trainable(v);
            }
            if let Some(v) = &args.source_guesses {
                cfg.sources.guesses = Some(parse_guesses(v)?);
            }
            if let Some(v) = args.eval_spacing {
                cfg.eval_spacing = v;
            }
            let out = cli::wells_cmd(&cfg, &args.wells, &out_dir(&args.out_dir))?;
            println!(
                "fitted {} sources; head field in {}",
                out.fitted_sources.len(),
                out.field_path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
