//! Probabilistic model-based diagnosis with reliability-derived priors.
//!
//! Component failure probabilities come from hazard models (MTBF or Weibull)
//! and the time each unit has been in service. A [`BeliefState`] holds the
//! exact joint distribution over fault candidates and is carried through time
//! by persistence steps, conditioned on observations, and reset by repairs.
//! Composite fix/dont-fix decisions are ranked by expected cost.
//!
//! The numeric core is generic over [`Scalar`] (`f64` or `f32`). Every generic
//! type defaults to `f64`; `*F32` aliases below name the single-precision
//! forms.
//!
//! ```
//! use faultline_core::{circuits, engine, decision, Observation, SystemModel};
//!
//! let model: SystemModel = circuits::three_gate();
//! let prior = engine::initial_belief(&model, 10.0).unwrap();
//! let obs = Observation::new(10.0, [("I1", 1), ("I2", 1), ("I3", 0), ("I6", 0)]);
//! let posterior = engine::assimilate(&model, &prior, &obs).unwrap();
//! let best = &decision::rank_decisions(&posterior, &model).unwrap()[0];
//! assert!(best.expected_cost < 0.09);
//! ```

pub mod circuits;
pub mod decision;
pub mod engine;
mod error;
pub mod model;
pub mod reliability;
pub mod report;
mod scalar;
pub mod scenario;

pub use decision::{Action, CompositeDecision, CostTable, DecisionEvaluation};
pub use engine::{BeliefState, Event, Marginal, Step, Trajectory};
pub use error::{DiagnosisError, DocumentError, Result};
pub use model::document::ModelDocument;
pub use model::{
    Behavior, Candidate, ComponentSpec, Mode, Observation, SystemModel, ValidationReport, Value, Variable,
    VariableKind, Violation,
};
pub use reliability::{rate_from_mtbf, HazardModel, TransitionMatrix};
pub use report::ReportBundle;
pub use scalar::Scalar;
pub use scenario::Scenario;

pub type HazardModelF32 = HazardModel<f32>;
pub type TransitionMatrixF32 = TransitionMatrix<f32>;
pub type CostTableF32 = CostTable<f32>;
pub type SystemModelF32 = SystemModel<f32>;
pub type ObservationF32 = Observation<f32>;
pub type BeliefStateF32 = BeliefState<f32>;
pub type EventF32 = Event<f32>;
pub type DecisionEvaluationF32 = DecisionEvaluation<f32>;
