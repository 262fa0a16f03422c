//! Dataset generation: solve the reference problem, sample noisy
//! measurements, and write the data/truth pair.

use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{
    discretize_sources, sine_dirichlet_boundary, solve_dirichlet, DirichletProblem,
    SourceDiscretization,
};
use crate::field::FieldGrid;
use crate::geometry::BoxDomain;
use crate::kernels::Point;
use crate::pibi::PointSourceSet;
use crate::training::{seed_stream, subseed};

use super::io;
use super::manifest::ManifestBuilder;

/// Benchmark scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Homogeneous Laplace problem with sine/step Dirichlet data and a
    /// magnitude-2 outlier at the center.
    LaplaceEq15,
    /// Five random point sources with magnitudes uniform in (-5, 5).
    PoissonRandomSources,
}

impl std::str::FromStr for Scenario {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "laplace_eq15" => Ok(Self::LaplaceEq15),
            "poisson_random_sources" => Ok(Self::PoissonRandomSources),
            other => Err(Error::InvalidConfig(format!("unknown scenario {other:?}"))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::LaplaceEq15 => "laplace_eq15",
            Self::PoissonRandomSources => "poisson_random_sources",
        })
    }
}

/// Where measurements are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// The ring `(-1,1)^2 \ [-0.6,0.6]^2`.
    ThetaRing,
    /// The whole square `(-1,1)^2`.
    FullOmega,
}

impl std::str::FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theta_ring" => Ok(Self::ThetaRing),
            "full_omega" => Ok(Self::FullOmega),
            other => Err(Error::InvalidConfig(format!("unknown region {other:?}"))),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ThetaRing => "theta_ring",
            Self::FullOmega => "full_omega",
        })
    }
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::FullOmega => true,
            Region::ThetaRing => p[0].abs().max(p[1].abs()) > 0.6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenDataConfig {
    pub scenario: Scenario,
    pub region: Region,
    pub count: usize,
    pub seed: u64,
    pub noise_std: f64,
    pub spacing: f64,
    pub num_sources: usize,
    pub source_mode: SourceDiscretization,
}

impl Default for GenDataConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::LaplaceEq15,
            region: Region::FullOmega,
            count: 50,
            seed: 0,
            noise_std: 0.2,
            spacing: 0.2,
            num_sources: 5,
            source_mode: SourceDiscretization::Bilinear,
        }
    }
}

pub struct GenDataOutput {
    pub data_path: PathBuf,
    pub truth_path: PathBuf,
    pub manifest_path: PathBuf,
    pub dataset: crate::training::Dataset,
    pub truth: FieldGrid,
    pub generator_sources: PointSourceSet,
}

/// Draw the scenario's ground-truth point sources.
pub fn draw_scenario_sources(count: usize, seed: u64) -> PointSourceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(seed, seed_stream::SCENARIO_SOURCES));
    let mut locations = Vec::with_capacity(count);
    let mut magnitudes = Vec::with_capacity(count);
    for _ in 0..count {
        locations.push(Point::new2(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ));
        magnitudes.push(rng.random_range(-5.0..5.0));
    }
    PointSourceSet::new(locations, magnitudes, false, false).expect("finite scenario sources")
}

/// Sample `count` points uniformly over the region (rejection sampling for
/// the ring), interpolate the truth there, and add Gaussian noise.
fn sample_measurements(
    truth: &FieldGrid,
    region: Region,
    count: usize,
    noise_std: f64,
    seed: u64,
) -> Result<(Vec<Point>, Vec<f64>)> {
    let mut point_rng = ChaCha8Rng::seed_from_u64(subseed(seed, seed_stream::DATA_POINTS));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(subseed(seed, seed_stream::NOISE));
    let normal = Normal::new(0.0, noise_std)
        .map_err(|e| Error::InvalidConfig(format!("noise std {noise_std}: {e}")))?;
    let mut points = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count);
    while points.len() < count {
        let p = Point::new2(
            point_rng.random_range(-1.0..1.0),
            point_rng.random_range(-1.0..1.0),
        );
        if !region.contains(&p) {
            continue;
        }
        let mut u = truth
            .interpolate(&p)?
            .expect("truth grid has no masked nodes");
        if noise_std > 0.0 {
            u += normal.sample(&mut noise_rng);
        }
        points.push(p);
        values.push(u);
    }
    Ok((points, values))
}

/// Generate a dataset and its ground-truth grid into `out_dir`.
pub fn gen_data(config: &GenDataConfig, out_dir: &Path) -> Result<GenDataOutput> {
    std::fs::create_dir_all(out_dir)?;
    let domain = BoxDomain::square(1.0);
    let sources = match config.scenario {
        Scenario::LaplaceEq15 => PointSourceSet::empty(),
        Scenario::PoissonRandomSources => {
            draw_scenario_sources(config.num_sources, config.seed)
        }
    };
    let problem = DirichletProblem {
        domain: domain.clone(),
        boundary: Box::new(|x: &Point| sine_dirichlet_boundary(x).expect("point on boundary")),
        sources: sources.clone(),
        source_mode: config.source_mode,
    };
    let truth = solve_dirichlet(&problem, config.spacing)?;

    let (mut points, mut values) = sample_measurements(
        &truth,
        config.region,
        config.count,
        config.noise_std,
        config.seed,
    )?;
    if config.scenario == Scenario::LaplaceEq15 {
        // The benchmark's outlier: magnitude 2 at the center, appended after
        // the noisy samples.
        points.push(Point::new2(0.0, 0.0));
        values.push(2.0);
    }

    let data_path = out_dir.join("data.csv");
    let truth_path = out_dir.join("truth.csv");
    let manifest_path = out_dir.join("manifest.json");
    io::write_measurements(&data_path, &points, &values)?;
    truth.write_csv(&truth_path)?;

    // The discretized source mass is recorded so the manifest captures the
    // exact right-hand side the truth was solved with.
    let rhs_mass: f64 = if sources.is_empty() {
        0.0
    } else {
        discretize_sources(&sources, &truth.spec, config.source_mode)?
            .iter()
            .sum::<f64>()
            * config.spacing
            * config.spacing
    };

    let mut builder = ManifestBuilder::new("gen-data", serde_json::to_value(config)?);
    builder.seed(config.seed);
    builder.output(&data_path).output(&truth_path);
    builder.extra(serde_json::json!({
        "generator_sources": sources,
        "rhs_discrete_mass": rhs_mass,
        "rows": points.len(),
    }));
    builder.write(&manifest_path)?;

    let dataset = crate::training::Dataset::new(points, values)?;
    Ok(GenDataOutput {
        data_path,
        truth_path,
        manifest_path,
        dataset,
        truth,
        generator_sources: sources,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_dataset_has_outlier_and_ring_exclusion() {
        let dir = tempfile::tempdir().unwrap();
        let config = GenDataConfig {
            region: Region::ThetaRing,
            count: 50,
            seed: 11,
            ..GenDataConfig::default()
        };
        let out = gen_data(&config, dir.path()).unwrap();
        assert_eq!(out.dataset.len(), 51);
        let (points, values) = (&out.dataset.points, &out.dataset.values);
        assert_eq!(points[50].coords(), &[0.0, 0.0]);
        assert_eq!(values[50], 2.0);
        for p in &points[..50] {
            assert!(p[0].abs().max(p[1].abs()) > 0.6, "{p:?} inside the ring hole");
        }
    }

    #[test]
    fn noiseless_samples_equal_interpolated_truth() {
        let dir = tempfile::tempdir().unwrap();
        let config = GenDataConfig {
            noise_std: 0.0,
            count: 20,
            seed: 3,
            ..GenDataConfig::default()
        };
        let out = gen_data(&config, dir.path()).unwrap();
        for (p, &v) in out.dataset.points.iter().zip(&out.dataset.values).take(20) {
            let t = out.truth.interpolate(p).unwrap().unwrap();
            assert_eq!(v, t);
        }
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let config = GenDataConfig {
            scenario: Scenario::PoissonRandomSources,
            count: 30,
            seed: 21,
            ..GenDataConfig::default()
        };
        gen_data(&config, d1.path()).unwrap();
        gen_data(&config, d2.path()).unwrap();
        for name in ["data.csv", "truth.csv"] {
            let a = std::fs::read(d1.path().join(name)).unwrap();
            let b = std::fs::read(d2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn poisson_sources_are_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let config = GenDataConfig {
            scenario: Scenario::PoissonRandomSources,
            count: 10,
            seed: 5,
            ..GenDataConfig::default()
        };
        let out = gen_data(&config, dir.path()).unwrap();
        assert_eq!(out.generator_sources.len(), 5);
        assert_eq!(out.dataset.len(), 10, "no outlier for the Poisson scenario");
        for &c in &out.generator_sources.magnitudes {
            assert!((-5.0..5.0).contains(&c));
        }
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.manifest_path).unwrap()).unwrap();
        assert_eq!(
            manifest["extra"]["generator_sources"]["magnitudes"]
                .as_array()
                .unwrap()
                .len(),
            5
        );
    }
}
