//! Model files: a builtin model id, Λ, an optional pinned chamber and the
//! lattice, in TOML.
//!
//! ```toml
//! model_id = "pentagon"
//! lambda = [1.0, 0.0]
//! chamber = "in"
//! pairing = [[0, 1], [-1, 0]]
//! flavor_rank = 0
//! ```

use std::path::Path;

use num::complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{builtin, ModelDefinition};
use crate::charge_lattice::{ModelId, Spectrum};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model_id: ModelId,
    pub lambda: [f64; 2],
    /// Use this chamber's spectrum at every point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chamber: Option<String>,
    pub pairing: Vec<Vec<i64>>,
    #[serde(default)]
    pub flavor_rank: usize,
}

impl ModelConfig {
    pub fn from_model(model: &ModelDefinition, chamber: Option<&str>) -> Self {
        let l = model.central.lambda();
        ModelConfig {
            model_id: model.id,
            lambda: [l.re, l.im],
            chamber: chamber.map(str::to_owned),
            pairing: model.lattice.pairing_matrix().to_vec(),
            flavor_rank: model.lattice.flavor_rank(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.message().to_owned()))
    }

    /// Canonical text form; also the input of solution hashes.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("model config serializes")
    }

    /// Build the model, checking the lattice against the builtin one.
    pub fn build(&self) -> Result<ModelDefinition> {
        let mut model = builtin(self.model_id, C64::new(self.lambda[0], self.lambda[1]))?;
        if self.pairing != model.lattice.pairing_matrix() || self.flavor_rank != model.lattice.flavor_rank() {
            return Err(Error::ModelMismatch(format!(
                "lattice does not match the {} model",
                self.model_id
            )));
        }
        if let Some(label) = &self.chamber {
            let ch = model
                .spectrum
                .chambers()
                .iter()
                .find(|c| &c.label == label)
                .ok_or_else(|| Error::Parse(format!("model has no chamber '{label}'")))?;
            model.spectrum = Spectrum::fixed(ch.entries.clone());
        }
        Ok(model)
    }
}

/// A builtin name (`ov`, `pentagon`) with Λ = 1, or a model file.
pub fn load_model(spec: &str) -> Result<(ModelDefinition, ModelConfig)> {
    if let Ok(id) = spec.parse::<ModelId>() {
        if !Path::new(spec).is_file() {
            let model = builtin(id, C64::new(1.0, 0.0))?;
            let cfg = ModelConfig::from_model(&model, None);
            return Ok((model, cfg));
        }
    }
    if !Path::new(spec).exists() {
        return Err(Error::Parse(format!(
            "unknown model '{spec}': not a builtin name or a file"
        )));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| Error::Parse(format!("{spec}: {e}")))?;
    let cfg = ModelConfig::parse(&text)?;
    Ok((cfg.build()?, cfg))
}
