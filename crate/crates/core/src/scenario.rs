//! Scenario files: a model, a start time and an event script.
//!
//! ```json
//! {
//!   "model": "paper_circuit.json",
//!   "t0": 20,
//!   "events": [
//!     {"type": "observe", "time": 20, "assignments": {"I1": 0, "I6": 1}},
//!     {"type": "repair", "time": 20, "components": ["X"]}
//!   ]
//! }
//! ```
//!
//! `model` is either a path (relative to the scenario file) or an inline
//! model document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::engine::{self, Event, Trajectory};
use crate::error::{DiagnosisError, DocumentError};
use crate::model::document::ModelDocument;
use crate::model::SystemModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Path(PathBuf),
    Inline(ModelDocument),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub model: ModelSource,
    pub t0: f64,
    #[serde(default)]
    pub events: Vec<Event<f64>>,
}

/// A scenario with its model resolved and parsed.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub document: ModelDocument,
    pub model: SystemModel,
    pub t0: f64,
    pub events: Vec<Event<f64>>,
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, DocumentError> {
        let doc: ScenarioDocument = serde_json::from_str(text)?;
        let document = match doc.model {
            ModelSource::Inline(d) => d,
            ModelSource::Path(p) => ModelDocument::load(base_dir.join(p))?,
        };
        let model = document.to_model()?;
        Ok(Scenario {
            document,
            model,
            t0: doc.t0,
            events: doc.events,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DocumentError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DocumentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn run(&self) -> Result<Trajectory, DiagnosisError> {
        engine::run_events(&self.model, self.t0, &self.events)
    }
}
