use std::path::Path;

use serde::{Deserialize, Serialize};

use super::perturb::{deformed_field, DeformationSpec};
use crate::error::Result;
use crate::manifold::{make_model, MetricField, ModelDescriptor};

/// A zoo model followed by an ordered list of perturbations; rebuilding it
/// reproduces the metric exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricDescriptor {
    pub base: ModelDescriptor,
    #[serde(default)]
    pub deformations: Vec<DeformationSpec>,
}

impl MetricDescriptor {
    pub fn plain(base: ModelDescriptor) -> Self {
        Self {
            base,
            deformations: Vec::new(),
        }
    }

    pub fn build(&self) -> Result<MetricField> {
        let mut field = make_model(&self.base)?;
        for spec in &self.deformations {
            field = deformed_field(&field, spec.clone())?;
        }
        Ok(field)
    }

    /// Accepts either a full descriptor or a bare model descriptor.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("base").is_some() {
            Ok(serde_json::from_value(value)?)
        } else {
            Ok(Self::plain(serde_json::from_value(value)?))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}
