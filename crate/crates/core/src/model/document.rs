//! JSON model files.
//!
//! ```json
//! {
//!   "variables": [{"name": "I1", "domain": [0, 1], "kind": "input"}, ...],
//!   "components": [{
//!     "id": "A",
//!     "mtbf_hours": 100,
//!     "behavior": {"ok": "AND", "broken": "STUCK_AT_0"},
//!     "inputs": ["I1", "I2"],
//!     "output": "I4",
//!     "costs": {"fix_cost": 2, "broken_unrepaired_cost": 8}
//!   }],
//!   "commissioning_time": 0
//! }
//! ```
//!
//! `hazard: {"type": "weibull", "params": {"shape": 2, "scale": 100}}` (or
//! `constant_rate` with `rate`) replaces `mtbf_hours`. Unknown keys are errors.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Behavior, ComponentSpec, SystemModel, Variable};
use crate::decision::CostTable;
use crate::error::DocumentError;
use crate::reliability::HazardModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BehaviorPair {
    pub ok: Behavior,
    pub broken: Behavior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mtbf_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hazard: Option<HazardModel<f64>>,
    pub behavior: BehaviorPair,
    pub inputs: Vec<String>,
    pub output: String,
    pub costs: CostTable<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub variables: Vec<Variable>,
    pub components: Vec<ComponentDocument>,
    #[serde(default)]
    pub commissioning_time: f64,
}

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Builds the model. Parameter values are carried over unchecked so that
    /// out-of-range hazards and costs surface as validation violations.
    pub fn to_model<T: Scalar>(&self) -> Result<SystemModel<T>, DocumentError> {
        let components = self
            .components
            .iter()
            .map(|c| {
                let hazard = match (c.mtbf_hours, c.hazard) {
                    (Some(mtbf), None) => HazardModel::ConstantRate {
                        rate: T::from_f64(mtbf).recip(),
                    },
                    (None, Some(HazardModel::ConstantRate { rate })) => HazardModel::ConstantRate {
                        rate: T::from_f64(rate),
                    },
                    (None, Some(HazardModel::Weibull { shape, scale })) => HazardModel::Weibull {
                        shape: T::from_f64(shape),
                        scale: T::from_f64(scale),
                    },
                    _ => {
                        return Err(DocumentError::Schema(format!(
                            "component `{}`: exactly one of `mtbf_hours` and `hazard` is required",
                            c.id
                        )))
                    }
                };
                Ok(ComponentSpec {
                    id: c.id.clone(),
                    hazard,
                    ok: c.behavior.ok.clone(),
                    broken: c.behavior.broken.clone(),
                    inputs: c.inputs.clone(),
                    output: c.output.clone(),
                    cost: CostTable {
                        fix_cost: T::from_f64(c.costs.fix_cost),
                        broken_unrepaired_cost: T::from_f64(c.costs.broken_unrepaired_cost),
                    },
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SystemModel::new(
            self.variables.clone(),
            components,
            T::from_f64(self.commissioning_time),
        ))
    }
}
