//! Training dispatch for both methods, with model/report/trace outputs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoxDomain, SamplingMode};
use crate::kernels::Point;
use crate::pibi::{PibiModel, PointSourceSet};
use crate::pinn::{self, CvScoring, PinnConfig};
use crate::training::{self, seed_stream, subseed, Dataset, TrainConfig, TrainReport};

use super::io;
use super::manifest::ManifestBuilder;
use super::model_file::ModelFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pibi,
    Pinn,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pibi" => Ok(Self::Pibi),
            "pinn" => Ok(Self::Pinn),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Pibi => "pibi",
            Self::Pinn => "pinn",
        })
    }
}

/// Source setup for inverse runs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SourceSetup {
    pub num_sources: usize,
    /// Explicit initial guesses `(x, y, magnitude)`; falls back to the
    /// seeded random initialization when absent.
    pub guesses: Option<Vec<(f64, f64, f64)>>,
    pub train_locations: bool,
    pub train_magnitudes: bool,
}

impl SourceSetup {
    pub fn trainable(num_sources: usize) -> Self {
        Self {
            num_sources,
            guesses: None,
            train_locations: true,
            train_magnitudes: true,
        }
    }

    pub fn build(&self, domain: &BoxDomain, seed: u64) -> Result<PointSourceSet> {
        if self.num_sources == 0 {
            return Ok(PointSourceSet::empty());
        }
        match &self.guesses {
            Some(guesses) => {
                if guesses.len() != self.num_sources {
                    return Err(Error::InvalidConfig(format!(
                        "{} guesses for {} sources",
                        guesses.len(),
                        self.num_sources
                    )));
                }
                let locations = guesses.iter().map(|g| Point::new2(g.0, g.1)).collect();
                let magnitudes = guesses.iter().map(|g| g.2).collect();
                PointSourceSet::new(
                    locations,
                    magnitudes,
                    self.train_locations,
                    self.train_magnitudes,
                )
            }
            None => Ok(training::init_sources(
                self.num_sources,
                domain,
                self.train_locations,
                self.train_magnitudes,
                seed,
            )),
        }
    }
}

/// Everything the `train` command needs beyond the shared TrainConfig.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainCmdConfig {
    pub method: Method,
    pub train: TrainConfig,
    pub sources: SourceSetup,
    pub domain_lower: [f64; 2],
    pub domain_upper: [f64; 2],
    /// Collocation points drawn on the integration boundary when the
    /// boundary-loss weight is positive.
    pub collocation_count: usize,
    pub lambda_physics: f64,
    pub sigma_delta: f64,
    /// A non-empty grid triggers cross-validation for the PINN method.
    pub lambda_grid: Vec<f64>,
    /// Reference grid for cross-validation scoring; held-out data split
    /// otherwise.
    pub truth: Option<PathBuf>,
}

impl Default for TrainCmdConfig {
    fn default() -> Self {
        let pinn_defaults = PinnConfig::default();
        Self {
            method: Method::Pibi,
            train: TrainConfig::default(),
            sources: SourceSetup::default(),
            domain_lower: [-1.0, -1.0],
            domain_upper: [1.0, 1.0],
            collocation_count: 200,
            lambda_physics: pinn_defaults.lambda_physics,
            sigma_delta: pinn_defaults.sigma_delta,
            lambda_grid: Vec::new(),
            truth: None,
        }
    }
}

impl TrainCmdConfig {
    pub fn domain(&self) -> Result<BoxDomain> {
        BoxDomain::new(
            Point::new2(self.domain_lower[0], self.domain_lower[1]),
            Point::new2(self.domain_upper[0], self.domain_upper[1]),
        )
    }

    fn pinn_config(&self) -> PinnConfig {
        let mut cfg = PinnConfig {
            train: self.train.clone(),
            lambda_physics: self.lambda_physics,
            collocation_count: self.collocation_count,
            sigma_delta: self.sigma_delta,
            ..PinnConfig::default()
        };
        if !self.lambda_grid.is_empty() {
            cfg.lambda_grid = self.lambda_grid.clone();
        }
        cfg
    }
}

pub struct TrainOutput {
    pub model_path: PathBuf,
    pub report_path: PathBuf,
    pub trace_path: PathBuf,
    pub scores_path: Option<PathBuf>,
    pub manifest_path: PathBuf,
    pub model: ModelFile,
    pub report: TrainReport,
    pub lambda_table: Option<Vec<pinn::LambdaScore>>,
}

/// Train a model in memory (no files). Used by the benchmark harness.
pub fn train_in_memory(
    config: &TrainCmdConfig,
    dataset: &Dataset,
    truth: Option<&crate::field::FieldGrid>,
) -> Result<(ModelFile, TrainReport, Option<Vec<pinn::LambdaScore>>)> {
    let domain = config.domain()?;
    let seed = config.train.seed;
    let sources = config.sources.build(&domain, seed)?;
    match config.method {
        Method::Pibi => {
            let mut data = dataset.clone();
            if config.train.lambda > 0.0 && config.collocation_count > 0 {
                let enlarged = crate::geometry::enlarge(&domain, config.train.epsilon_enlarge)?;
                data.collocation = crate::geometry::sample_boundary(
                    &enlarged,
                    config.collocation_count,
                    SamplingMode::Random,
                    subseed(seed, seed_stream::COLLOCATION),
                )?
                .into_iter()
                .map(|s| s.point)
                .collect();
            }
            let model = PibiModel::assemble(
                domain,
                sources,
                &config.train.layer_sizes(2),
                config.train.epsilon_enlarge,
                config.train.integration_points,
                config.train.sampling_mode,
                subseed(seed, seed_stream::NETWORK_INIT),
                subseed(seed, seed_stream::BOUNDARY),
            )?;
            let (trained, report) = training::train(model, &data, &config.train)?;
            Ok((ModelFile::Pibi(trained), report, None))
        }
        Method::Pinn => {
            let pinn_config = config.pinn_config();
            if config.lambda_grid.is_empty() {
                let (model, report) =
                    pinn::pinn_train(dataset, &domain, sources, &pinn_config)?;
                Ok((ModelFile::Pinn(model), report, None))
            } else {
                let scoring = match truth {
                    Some(truth) => CvScoring::TruthField {
                        truth,
                        region: domain.clone(),
                        eval_spacing: 0.02,
                    },
                    None => CvScoring::Holdout {
                        fraction: 0.2,
                        seed,
                    },
                };
                let (_best, table, model, report) =
                    pinn::lambda_cross_validate(dataset, &domain, &sources, &pinn_config, &scoring)?;
                Ok((ModelFile::Pinn(model), report, Some(table)))
            }
        }
    }
}

/// The `train` command: read a measurement CSV, train, and write the model,
/// report, loss trace and manifest.
pub fn train_cmd(config: &TrainCmdConfig, data_path: &Path, out_dir: &Path) -> Result<TrainOutput> {
    std::fs::create_dir_all(out_dir)?;
    let dataset = io::read_measurements(data_path)?;
    let truth = config
        .truth
        .as_ref()
        .map(|p| crate::field::FieldGrid::read_csv(p))
        .transpose()?;
    let (model, report, table) = train_in_memory(config, &dataset, truth.as_ref())?;

    let model_path = out_dir.join("model.json");
    let report_path = out_dir.join("report.json");
    let trace_path = out_dir.join("trace.csv");
    let manifest_path = out_dir.join("manifest.json");
    model.save(&model_path)?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    io::write_trace(&trace_path, &report.trace)?;
    let scores_path = match &table {
        Some(table) => {
            let p = out_dir.join("lambda_scores.csv");
            io::write_lambda_scores(&p, table)?;
            Some(p)
        }
        None => None,
    };

    let mut builder = ManifestBuilder::new("train", serde_json::to_value(config)?);
    builder.seed(config.train.seed);
    builder.input(data_path)?;
    if let Some(truth_path) = &config.truth {
        builder.input(truth_path)?;
    }
    builder.output(&model_path).output(&report_path).output(&trace_path);
    if let Some(p) = &scores_path {
        builder.output(p);
    }
    for w in &report.warnings {
        builder.warn(w.clone());
    }
    builder.write(&manifest_path)?;

    Ok(TrainOutput {
        model_path,
        report_path,
        trace_path,
        scores_path,
        manifest_path,
        model,
        report,
        lambda_table: table,
    })
}
