//! Model evaluation against a reference grid on a common fine grid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, FieldGrid, GridSpec};
use crate::geometry::BoxDomain;
use crate::kernels::Point;

use super::manifest::ManifestBuilder;
use super::model_file::ModelFile;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub model_kind: String,
    pub eval_spacing: f64,
    pub mae: f64,
    pub max_abs_error: f64,
    pub masked_nodes: usize,
    pub nodes: usize,
}

pub struct EvaluateOutput {
    pub metrics: EvalMetrics,
    pub metrics_path: PathBuf,
    pub field_path: PathBuf,
    pub manifest_path: PathBuf,
}

/// Bounding box of a grid.
fn grid_box(grid: &FieldGrid) -> Result<BoxDomain> {
    let (n1, n2) = grid.spec.shape;
    let h = grid.spec.spacing;
    let lower = grid.spec.origin.clone();
    let upper = Point::new2(
        lower[0] + (n1 - 1) as f64 * h,
        lower[1] + (n2 - 1) as f64 * h,
    );
    BoxDomain::new(lower, upper)
}

/// Evaluate a model against a reference grid: both are brought onto the
/// evaluation grid (the model by direct evaluation, the reference by
/// bilinear interpolation) and compared node-wise.
pub fn evaluate_in_memory(
    model: &ModelFile,
    truth: &FieldGrid,
    eval_spacing: f64,
) -> Result<(EvalMetrics, FieldGrid)> {
    let region = grid_box(truth)?;
    let spec = GridSpec::covering(&region, eval_spacing)?;
    let predicted = model.evaluate_field(&spec)?;
    let (n1, n2) = spec.shape;
    let mut values = Vec::with_capacity(spec.len());
    let mut mask = Vec::with_capacity(spec.len());
    for i in 0..n1 {
        for j in 0..n2 {
            match truth.interpolate(&spec.node(i, j))? {
                Some(v) => {
                    values.push(v);
                    mask.push(false);
                }
                None => {
                    values.push(f64::NAN);
                    mask.push(true);
                }
            }
        }
    }
    let mask = if mask.iter().any(|&m| m) {
        Some(mask)
    } else {
        None
    };
    let reference = FieldGrid::new(spec, values, mask)?;
    let metrics = EvalMetrics {
        model_kind: model.kind().to_string(),
        eval_spacing,
        mae: field::mae(&predicted, &reference)?,
        max_abs_error: field::max_abs_error(&predicted, &reference)?,
        masked_nodes: predicted.masked_count() + reference.masked_count(),
        nodes: predicted.values().len(),
    };
    Ok((metrics, predicted))
}

/// The `evaluate` command: metrics JSON plus the evaluated field CSV.
pub fn evaluate_cmd(
    model_path: &Path,
    truth_path: &Path,
    eval_spacing: f64,
    out_dir: &Path,
) -> Result<EvaluateOutput> {
    if eval_spacing <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "evaluation spacing {eval_spacing} must be positive"
        )));
    }
    std::fs::create_dir_all(out_dir)?;
    let model = ModelFile::load(model_path)?;
    let truth = FieldGrid::read_csv(truth_path)?;
    let (metrics, predicted) = evaluate_in_memory(&model, &truth, eval_spacing)?;

    let metrics_path = out_dir.join("metrics.json");
    let field_path = out_dir.join("field.csv");
    let manifest_path = out_dir.join("manifest.json");
    std::fs::write(&metrics_path, serde_json::to_string_pretty(&metrics)?)?;
    predicted.write_csv(&field_path)?;

    let mut builder = ManifestBuilder::new(
        "evaluate",
        serde_json::json!({ "eval_spacing": eval_spacing }),
    );
    builder.input(model_path)?;
    builder.input(truth_path)?;
    builder.output(&metrics_path).output(&field_path);
    builder.write(&manifest_path)?;

    Ok(EvaluateOutput {
        metrics,
        metrics_path,
        field_path,
        manifest_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::MlpParams;
    use crate::pibi::PointSourceSet;
    use crate::pinn::PinnModel;

    #[test]
    fn constant_model_against_constant_truth_has_zero_mae() {
        // A PINN file whose network is identically 0.75.
        let mut params = MlpParams::zeros(&[2, 4, 1]).unwrap();
        params.biases_mut(1)[0] = 0.75;
        let model = ModelFile::Pinn(PinnModel {
            params,
            sources: PointSourceSet::empty(),
            sigma_delta: 1e-3,
        });
        let truth = FieldGrid::from_fn(
            GridSpec::covering(&BoxDomain::square(1.0), 0.2).unwrap(),
            |_| 0.75,
        )
        .unwrap();
        let (metrics, _) = evaluate_in_memory(&model, &truth, 0.02).unwrap();
        // Interpolation weight round-off only.
        assert!(metrics.mae < 1e-15, "mae {}", metrics.mae);
        assert_eq!(metrics.nodes, 101 * 101);
    }
}
