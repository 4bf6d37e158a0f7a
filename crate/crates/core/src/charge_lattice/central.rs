use std::fmt;
use std::str::FromStr;

use num::complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::lattice::Charge;
use crate::error::{Error, Result};
use crate::model_library::{ov, pentagon};

/// Models with a registered central charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    OoguriVafa,
    Pentagon,
}

impl ModelId {
    pub fn name(self) -> &'static str {
        match self {
            ModelId::OoguriVafa => "ooguri-vafa",
            ModelId::Pentagon => "pentagon",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ov" | "ooguri-vafa" | "ooguri_vafa" => Ok(ModelId::OoguriVafa),
            "pentagon" => Ok(ModelId::Pentagon),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// Central charge u ↦ Z_γ(u), evaluated on the fixed basis of the lattice
/// and extended linearly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralCharge {
    model: ModelId,
    lambda: C64,
}

impl CentralCharge {
    pub fn new(model: ModelId, lambda: C64) -> Result<Self> {
        if !lambda.is_finite() || lambda.norm() <= 0.0 {
            return Err(Error::InvalidParameter(format!("Λ = {lambda} must be nonzero")));
        }
        Ok(CentralCharge { model, lambda })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn lambda(&self) -> C64 {
        self.lambda
    }

    pub fn rank(&self) -> usize {
        2
    }

    /// Basis values Z_{e_i}(u) and holomorphic derivatives dZ_{e_i}/du.
    pub fn basis_with_derivatives(&self, u: C64) -> Result<(Vec<C64>, Vec<C64>)> {
        let pairs = match self.model {
            ModelId::OoguriVafa => ov::periods(self.lambda, u)?,
            ModelId::Pentagon => pentagon::periods(self.lambda, u)?,
        };
        Ok((pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()))
    }

    pub fn basis_values(&self, u: C64) -> Result<Vec<C64>> {
        Ok(self.basis_with_derivatives(u)?.0)
    }

    /// Z_γ(u).
    pub fn eval(&self, gamma: &Charge, u: C64) -> Result<C64> {
        if gamma.rank() != self.rank() {
            return Err(Error::DimensionMismatch {
                expected: self.rank(),
                got: gamma.rank(),
            });
        }
        Ok(combine(gamma, &self.basis_values(u)?))
    }

    /// Index of the chamber containing u; errors on walls and at D.
    pub fn chamber(&self, u: C64) -> Result<usize> {
        match self.model {
            ModelId::OoguriVafa => {
                ov::periods(self.lambda, u)?;
                Ok(0)
            }
            ModelId::Pentagon => pentagon::chamber(self.lambda, u),
        }
    }
}

/// Σ γⁱ·values[i].
pub fn combine(gamma: &Charge, values: &[C64]) -> C64 {
    gamma
        .coeffs()
        .iter()
        .zip(values)
        .fold(C64::new(0.0, 0.0), |acc, (c, z)| acc + z * (*c as f64))
}
