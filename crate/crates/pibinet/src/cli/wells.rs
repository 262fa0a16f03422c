//! Well-data ingestion: normalize coordinates and heads, fit the
//! boundary-integral model with trainable sources, and export the head and
//! gradient fields back in user units.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::geometry::BoxDomain;
use crate::kernels::Point;
use crate::pibi::PibiModel;
use crate::training::{self, Dataset, TrainConfig, TrainReport};

use super::io::{self, fmt_f64, WellRecord};
use super::manifest::ManifestBuilder;
use super::model_file::ModelFile;
use super::train_cmd::SourceSetup;

/// Affine map `user = center + half_span * normalized` per axis, plus the
/// head standardization. Stored in the manifest for exact inversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Normalization {
    pub center: [f64; 2],
    pub half_span: [f64; 2],
    pub head_mean: f64,
    pub head_std: f64,
}

impl Normalization {
    pub fn to_normalized(&self, x: f64, y: f64) -> Point {
        Point::new2(
            (x - self.center[0]) / self.half_span[0],
            (y - self.center[1]) / self.half_span[1],
        )
    }

    pub fn to_user(&self, p: &Point) -> (f64, f64) {
        (
            self.center[0] + self.half_span[0] * p[0],
            self.center[1] + self.half_span[1] * p[1],
        )
    }
}

/// Derive the normalization from the well records. Degenerate coordinate
/// spreads fall back to the larger axis span with a warning.
fn normalization(records: &[WellRecord], warnings: &mut Vec<String>) -> Normalization {
    let (mut min, mut max) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for r in records {
        for (k, v) in [r.x, r.y].into_iter().enumerate() {
            min[k] = min[k].min(v);
            max[k] = max[k].max(v);
        }
    }
    let spans = [max[0] - min[0], max[1] - min[1]];
    let largest = spans[0].max(spans[1]);
    let mut half_span = [0.0; 2];
    for k in 0..2 {
        if spans[k] < 1e-9 * largest || largest == 0.0 {
            warnings.push(format!(
                "degenerate well coordinate spread on axis {k} (span {:.3e}); \
                 using the larger axis span for scaling",
                spans[k]
            ));
            half_span[k] = if largest > 0.0 { largest / 2.0 } else { 1.0 };
        } else {
            half_span[k] = spans[k] / 2.0;
        }
    }
    let n = records.len() as f64;
    let head_mean = records.iter().map(|r| r.head).sum::<f64>() / n;
    let mut head_std =
        (records.iter().map(|r| (r.head - head_mean).powi(2)).sum::<f64>() / n).sqrt();
    if head_std < 1e-12 {
        warnings.push("well heads are constant; skipping head scaling".into());
        head_std = 1.0;
    }
    Normalization {
        center: [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1])],
        half_span,
        head_mean,
        head_std,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WellsConfig {
    pub train: TrainConfig,
    pub sources: SourceSetup,
    pub eval_spacing: f64,
}

impl Default for WellsConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig {
                // The groundwater experiments use a denser integration rule.
                integration_points: 500,
                ..TrainConfig::default()
            },
            sources: SourceSetup::trainable(0),
            eval_spacing: 0.02,
        }
    }
}

/// One fitted source mapped back to user units.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FittedSource {
    pub location_user: [f64; 2],
    pub location_normalized: [f64; 2],
    pub magnitude_normalized: f64,
    /// Magnitude multiplied by the head scale; exact for isotropic
    /// coordinate scaling, approximate otherwise.
    pub magnitude_descaled: f64,
}

pub struct WellsOutput {
    pub model_path: PathBuf,
    pub report_path: PathBuf,
    pub field_path: PathBuf,
    pub gradient_path: PathBuf,
    pub sources_path: PathBuf,
    pub manifest_path: PathBuf,
    pub normalization: Normalization,
    pub fitted_sources: Vec<FittedSource>,
    pub report: TrainReport,
}

/// The `wells` command: rescale, fit, export in user units.
pub fn wells_cmd(config: &WellsConfig, wells_path: &Path, out_dir: &Path) -> Result<WellsOutput> {
    std::fs::create_dir_all(out_dir)?;
    let records = io::read_wells(wells_path)?;
    if records.len() < 3 {
        return Err(Error::InputData(format!(
            "need at least 3 well records, got {}",
            records.len()
        )));
    }
    let mut warnings = Vec::new();
    let norm = normalization(&records, &mut warnings);

    let points: Vec<Point> = records.iter().map(|r| norm.to_normalized(r.x, r.y)).collect();
    let values: Vec<f64> = records
        .iter()
        .map(|r| (r.head - norm.head_mean) / norm.head_std)
        .collect();
    let dataset = Dataset::new(points, values)?;

    // Source guesses arrive in user units; normalize them.
    let mut source_setup = config.sources.clone();
    if let Some(guesses) = &mut source_setup.guesses {
        for g in guesses.iter_mut() {
            let p = norm.to_normalized(g.0, g.1);
            (g.0, g.1) = (p[0], p[1]);
            g.2 /= norm.head_std;
        }
    }
    let domain = BoxDomain::square(1.0);
    let sources = source_setup.build(&domain, config.train.seed)?;

    let model = PibiModel::assemble(
        domain,
        sources,
        &config.train.layer_sizes(2),
        config.train.epsilon_enlarge,
        config.train.integration_points,
        config.train.sampling_mode,
        training::subseed(config.train.seed, training::seed_stream::NETWORK_INIT),
        training::subseed(config.train.seed, training::seed_stream::BOUNDARY),
    )?;
    let (trained, report) = training::train(model, &dataset, &config.train)?;

    // Evaluate on the normalized grid, export in user units.
    let spec = GridSpec::covering(&BoxDomain::square(1.0), config.eval_spacing)?;
    let field = trained.evaluate_field(&spec)?;
    let (dx, dy) = field.gradient()?;

    let field_path = out_dir.join("head_field.csv");
    {
        let mut w = std::io::BufWriter::new(std::fs::File::create(&field_path)?);
        writeln!(w, "x1,x2,value,masked")?;
        let (n1, n2) = spec.shape;
        for i in 0..n1 {
            for j in 0..n2 {
                let (x, y) = norm.to_user(&spec.node(i, j));
                let head = norm.head_mean + norm.head_std * field.value(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(head),
                    u8::from(field.is_masked(i, j))
                )?;
            }
        }
        w.flush()?;
    }

    let gradient_path = out_dir.join("gradient_field.csv");
    {
        // Chain rule: du_user/dx_user = head_std / half_span * du/dx.
        let gx = norm.head_std / norm.half_span[0];
        let gy = norm.head_std / norm.half_span[1];
        let mut w = std::io::BufWriter::new(std::fs::File::create(&gradient_path)?);
        writeln!(w, "x1,x2,du_dx1,du_dx2,masked")?;
        let (n1, n2) = spec.shape;
        for i in 0..n1 {
            for j in 0..n2 {
                let (x, y) = norm.to_user(&spec.node(i, j));
                let masked = dx.is_masked(i, j) || dy.is_masked(i, j);
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    fmt_f64(x),
                    fmt_f64(y),
                    fmt_f64(gx * dx.value(i, j)),
                    fmt_f64(gy * dy.value(i, j)),
                    u8::from(masked)
                )?;
            }
        }
        w.flush()?;
    }

    let fitted_sources: Vec<FittedSource> = trained
        .sources
        .locations
        .iter()
        .zip(&trained.sources.magnitudes)
        .map(|(loc, &c)| {
            let (x, y) = norm.to_user(loc);
            FittedSource {
                location_user: [x, y],
                location_normalized: [loc[0], loc[1]],
                magnitude_normalized: c,
                magnitude_descaled: c * norm.head_std,
            }
        })
        .collect();

    let model_path = out_dir.join("model.json");
    let report_path = out_dir.join("report.json");
    let sources_path = out_dir.join("sources.json");
    let manifest_path = out_dir.join("manifest.json");
    ModelFile::Pibi(trained).save(&model_path)?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    std::fs::write(
        &sources_path,
        serde_json::to_string_pretty(&serde_json::json!({
            "sources": fitted_sources,
            "normalization": norm,
        }))?,
    )?;

    let mut builder = ManifestBuilder::new("wells", serde_json::to_value(config)?);
    builder.seed(config.train.seed);
    builder.input(wells_path)?;
    builder
        .output(&model_path)
        .output(&report_path)
        .output(&field_path)
        .output(&gradient_path)
        .output(&sources_path);
    for w in warnings.iter().chain(&report.warnings) {
        builder.warn(w.clone());
    }
    builder.extra(serde_json::json!({ "normalization": norm, "wells": records.len() }));
    builder.write(&manifest_path)?;

    Ok(WellsOutput {
        model_path,
        report_path,
        field_path,
        gradient_path,
        sources_path,
        manifest_path,
        normalization: norm,
        fitted_sources,
        report,
    })
}
