//! On-disk model container: a tagged JSON document holding either model
//! kind, restorable without retraining.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldGrid, GridSpec};
use crate::pibi::PibiModel;
use crate::pinn::PinnModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Pibi(PibiModel),
    Pinn(PinnModel),
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::Pibi(_) => "pibi",
            ModelFile::Pinn(_) => "pinn",
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| crate::error::Error::InputData(format!("{}: {e}", path.display())))?;
        let model: ModelFile = serde_json::from_str(&text).map_err(|e| {
            crate::error::Error::InputData(format!("{}: {e}", path.display()))
        })?;
        if let ModelFile::Pibi(m) = &model {
            // Re-run the geometric construction checks on untrusted input.
            PibiModel::from_parts(
                m.params.clone(),
                m.sources.clone(),
                m.boundary().to_vec(),
                m.data_domain().clone(),
                m.integration_domain().clone(),
            )?;
        }
        Ok(model)
    }

    pub fn evaluate_field(&self, spec: &GridSpec) -> Result<FieldGrid> {
        match self {
            ModelFile::Pibi(m) => m.evaluate_field(spec),
            ModelFile::Pinn(m) => m.evaluate_field(spec),
        }
    }
}
