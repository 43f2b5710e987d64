//! Request and response payloads. Belief and decision tables reuse the rows
//! of [`ReportBundle`] so clients can share one schema with the CLI.

use faultline_core::report::{DecisionRow, MarginalRow, PosteriorRow};
use faultline_core::{Action, Event, ModelDocument, ReportBundle};
use serde::{Deserialize, Serialize};

use crate::store::{RejectedEvent, Session};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCreated {
    pub model_id: String,
    pub components: Vec<String>,
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    #[serde(default)]
    pub model_id: Option<String>,
    #[serde(default)]
    pub model: Option<ModelDocument>,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    pub t0: f64,
    pub time: f64,
    pub events: Vec<Event>,
    pub rejected: Vec<RejectedEvent>,
    pub bundle: ReportBundle,
}

impl SessionSummary {
    pub fn of(session: &Session, top: usize) -> Self {
        SessionSummary {
            session_id: session.id().to_string(),
            model_id: session.model_id().map(String::from),
            t0: session.t0(),
            time: session.belief().time(),
            events: session.events().to_vec(),
            rejected: session.rejected().to_vec(),
            bundle: session.bundle(top),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefView {
    pub session_id: String,
    pub time: f64,
    /// Number of candidates in the full joint.
    pub candidates: usize,
    pub posterior: Vec<PosteriorRow>,
    pub marginals: Vec<MarginalRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDecision {
    pub actions: Vec<Action>,
    pub expected_cost: f64,
    /// Set on the head of the ranking only.
    pub optimal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionsView {
    pub session_id: String,
    pub time: f64,
    /// False when the model has too many components to rank every decision;
    /// `decisions` is then empty and `factored` is the answer.
    pub ranked: bool,
    pub decisions: Vec<RankedDecision>,
    pub factored: DecisionRow,
}

impl DecisionsView {
    pub fn of(session_id: &str, bundle: ReportBundle) -> Self {
        let decisions = bundle
            .decisions
            .into_iter()
            .enumerate()
            .map(|(i, d)| RankedDecision {
                actions: d.actions,
                expected_cost: d.expected_cost,
                optimal: i == 0,
            })
            .collect::<Vec<_>>();
        DecisionsView {
            session_id: session_id.to_string(),
            time: bundle.time,
            ranked: !decisions.is_empty(),
            decisions,
            factored: bundle.optimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIf {
    #[serde(default)]
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub session_id: String,
    /// Time of the committed belief, unchanged by the request.
    pub committed_time: f64,
    pub bundle: ReportBundle,
}
