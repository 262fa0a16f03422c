//! Benchmark sweeps: datasets x methods x seeds, aggregated into a
//! mean/std table.

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::training::TrainConfig;

use super::evaluate::evaluate_in_memory;
use super::gen_data::{gen_data, GenDataConfig, Region, Scenario};
use super::io::fmt_f64;
use super::manifest::ManifestBuilder;
use super::train_cmd::{train_in_memory, Method, SourceSetup, TrainCmdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkCell {
    pub method: Method,
    pub count: usize,
    pub region: Region,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchmarkConfig {
    pub cells: Vec<BenchmarkCell>,
    pub seeds: Vec<u64>,
    pub train: TrainConfig,
    pub scenario: Scenario,
    pub noise_std: f64,
    pub truth_spacing: f64,
    pub eval_spacing: f64,
    pub collocation_count: usize,
    pub sigma_delta: f64,
    pub lambda_grid: Vec<f64>,
    /// Worker threads for the sweep; 0 uses the default pool.
    pub workers: usize,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        // The benchmark table layout: two sample sizes on the ring, two on
        // the full domain, both methods.
        let mut cells = Vec::new();
        for method in [Method::Pibi, Method::Pinn] {
            for (count, region) in [
                (50, Region::ThetaRing),
                (200, Region::ThetaRing),
                (100, Region::FullOmega),
                (500, Region::FullOmega),
            ] {
                cells.push(BenchmarkCell {
                    method,
                    count,
                    region,
                });
            }
        }
        Self {
            cells,
            seeds: (0..10).collect(),
            train: TrainConfig::default(),
            scenario: Scenario::LaplaceEq15,
            noise_std: 0.2,
            truth_spacing: 0.2,
            eval_spacing: 0.02,
            collocation_count: 200,
            sigma_delta: 1e-3,
            lambda_grid: (-8..=1).map(|k| 10f64.powi(k)).collect(),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub count: usize,
    pub region: Region,
    pub seed: u64,
    pub mae: f64,
    pub best_lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub count: usize,
    pub region: Region,
    pub mean_mae: f64,
    pub std_mae: f64,
    pub maes: Vec<f64>,
}

pub struct BenchmarkOutput {
    pub rows: Vec<BenchRow>,
    pub results: Vec<CellResult>,
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Run one (cell, seed) task: generate the dataset, train the method, score
/// it against the truth.
pub fn run_cell(
    config: &BenchmarkConfig,
    cell: &BenchmarkCell,
    seed: u64,
    task_dir: &Path,
) -> Result<CellResult> {
    std::fs::create_dir_all(task_dir)?;
    let gen_config = GenDataConfig {
        scenario: config.scenario,
        region: cell.region,
        count: cell.count,
        seed,
        noise_std: config.noise_std,
        spacing: config.truth_spacing,
        ..GenDataConfig::default()
    };
    let generated = gen_data(&gen_config, task_dir)?;

    let mut train_config = TrainCmdConfig {
        method: cell.method,
        train: TrainConfig {
            seed,
            ..config.train.clone()
        },
        collocation_count: config.collocation_count,
        sigma_delta: config.sigma_delta,
        ..TrainCmdConfig::default()
    };
    if cell.method == Method::Pinn {
        train_config.lambda_grid = config.lambda_grid.clone();
    }
    if config.scenario == Scenario::PoissonRandomSources {
        train_config.sources = SourceSetup::trainable(generated.generator_sources.len());
    }

    let (model, report, table) =
        train_in_memory(&train_config, &generated.dataset, Some(&generated.truth))?;
    let (metrics, _) = evaluate_in_memory(&model, &generated.truth, config.eval_spacing)?;

    let best_lambda = table.as_ref().map(|t| crate::pinn::argmin_lambda(t));
    let result = CellResult {
        method: cell.method,
        count: cell.count,
        region: cell.region,
        seed,
        mae: metrics.mae,
        best_lambda,
    };
    // Persist the partial result before any aggregation happens.
    std::fs::write(
        task_dir.join("result.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "result": result,
            "final_losses": {
                "observation": report.final_observation_loss,
                "secondary": report.final_boundary_loss,
            },
            "lambda_table": table,
        }))?,
    )?;
    Ok(result)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn cell_dir(out_dir: &Path, cell: &BenchmarkCell, seed: u64) -> PathBuf {
    out_dir
        .join("cells")
        .join(format!("{}_{}_{}", cell.method, cell.count, cell.region))
        .join(format!("seed_{seed}"))
}

/// The `benchmark` command: run every (cell, seed) task, then aggregate.
pub fn benchmark_cmd(config: &BenchmarkConfig, out_dir: &Path) -> Result<BenchmarkOutput> {
    if config.cells.is_empty() || config.seeds.is_empty() {
        return Err(Error::InvalidConfig("empty benchmark sweep".into()));
    }
    std::fs::create_dir_all(out_dir)?;
    let tasks: Vec<(BenchmarkCell, u64)> = config
        .cells
        .iter()
        .flat_map(|c| config.seeds.iter().map(move |&s| (*c, s)))
        .collect();

    let run_all = || -> Vec<Result<CellResult>> {
        tasks
            .par_iter()
            .map(|(cell, seed)| run_cell(config, cell, *seed, &cell_dir(out_dir, cell, *seed)))
            .collect()
    };
    let results: Vec<Result<CellResult>> = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(run_all)
    } else {
        run_all()
    };
    let results: Vec<CellResult> = results.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(config.cells.len());
    for cell in &config.cells {
        let maes: Vec<f64> = config
            .seeds
            .iter()
            .map(|&s| {
                results
                    .iter()
                    .find(|r| {
                        r.method == cell.method
                            && r.count == cell.count
                            && r.region == cell.region
                            && r.seed == s
                    })
                    .expect("every task completed")
                    .mae
            })
            .collect();
        let (mean, std) = mean_std(&maes);
        rows.push(BenchRow {
            method: cell.method,
            count: cell.count,
            region: cell.region,
            mean_mae: mean,
            std_mae: std,
            maes,
        });
    }

    let csv_path = out_dir.join("benchmark.csv");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        writeln!(w, "method,n,region,mean_mae,std_mae,seeds")?;
        for row in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.method,
                row.count,
                row.region,
                fmt_f64(row.mean_mae),
                fmt_f64(row.std_mae),
                row.maes.len()
            )?;
        }
        w.flush()?;
    }

    let manifest_path = out_dir.join("manifest.json");
    let mut builder = ManifestBuilder::new("benchmark", serde_json::to_value(config)?);
    for &s in &config.seeds {
        builder.seed(s);
    }
    builder.output(&csv_path);
    builder.extra(serde_json::json!({ "rows": rows }));
    builder.write(&manifest_path)?;

    Ok(BenchmarkOutput {
        rows,
        results,
        csv_path,
        manifest_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_single_seed_has_zero_std() {
        let dir = tempfile::tempdir().unwrap();
        let config = BenchmarkConfig {
            cells: vec![BenchmarkCell {
                method: Method::Pibi,
                count: 12,
                region: Region::FullOmega,
            }],
            seeds: vec![3],
            train: TrainConfig {
                iterations: 5,
                hidden_layers: vec![8],
                integration_points: 40,
                ..TrainConfig::default()
            },
            ..BenchmarkConfig::default()
        };
        let out = benchmark_cmd(&config, dir.path()).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].std_mae, 0.0);
        assert!(out.csv_path.exists());
        // The per-task partial result was persisted.
        assert!(cell_dir(
            dir.path(),
            &config.cells[0],
            3
        )
        .join("result.json")
        .exists());
    }

    #[test]
    fn rerun_with_same_seeds_is_byte_identical() {
        let config = BenchmarkConfig {
            cells: vec![BenchmarkCell {
                method: Method::Pibi,
                count: 10,
                region: Region::ThetaRing,
            }],
            seeds: vec![1, 2],
            train: TrainConfig {
                iterations: 4,
                hidden_layers: vec![6],
                integration_points: 24,
                ..TrainConfig::default()
            },
            workers: 2,
            ..BenchmarkConfig::default()
        };
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        benchmark_cmd(&config, d1.path()).unwrap();
        benchmark_cmd(&config, d2.path()).unwrap();
        let a = std::fs::read(d1.path().join("benchmark.csv")).unwrap();
        let b = std::fs::read(d2.path().join("benchmark.csv")).unwrap();
        assert_eq!(a, b);
    }
}
