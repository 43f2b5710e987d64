//! Models and sessions, with optional append-only persistence.
//!
//! With a data directory, every model is written to `models/<id>.json` and
//! every session to `sessions/<id>.jsonl`: a header line carrying the model
//! document and `t0`, then one line per accepted event. Rejected events go to
//! `sessions/<id>.rejected.jsonl`. Beliefs are never stored; they are refolded
//! from the log on startup.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use axum::http::StatusCode;
use faultline_core::engine::{self, BeliefState, Event};
use faultline_core::model::DEFAULT_ENUMERATION_CAP;
use faultline_core::{DiagnosisError, ModelDocument, ReportBundle, SystemModel};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::error::ApiError;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Where models and session logs are persisted; in-memory only if `None`.
    pub data_dir: Option<PathBuf>,
    pub enumeration_cap: usize,
    /// Posterior rows returned when a request does not ask for `top`.
    pub default_top: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            data_dir: None,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
            default_top: 8,
        }
    }
}

#[derive(Debug)]
pub struct StoredModel {
    pub id: String,
    pub document: ModelDocument,
    pub model: SystemModel,
}

/// An event that was refused, kept for operator review.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedEvent {
    pub event: Event,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum LogRecord {
    Header {
        session_id: String,
        #[serde(default)]
        model_id: Option<String>,
        model: ModelDocument,
        t0: f64,
    },
    Event {
        event: Event,
    },
}

fn append_line(path: &Path, value: &impl Serialize) -> io::Result<()> {
    let mut line = serde_json::to_string(value).map_err(io::Error::other)?;
    line.push('\n');
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    file.write_all(line.as_bytes())?;
    file.sync_data()
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> io::Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(value);
    }
    Ok(out)
}

/// One diagnosis session: a model, a start time and the accepted events.
#[derive(Debug)]
pub struct Session {
    id: String,
    model_id: Option<String>,
    document: ModelDocument,
    model: SystemModel,
    t0: f64,
    events: Vec<Event>,
    rejected: Vec<RejectedEvent>,
    /// Belief advanced to the last event's time, before its evidence.
    prior: BeliefState,
    belief: BeliefState,
    log: Option<PathBuf>,
    journal: Option<PathBuf>,
}

impl Session {
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn model_id(&self) -> Option<&str> {
        self.model_id.as_deref()
    }

    pub fn model(&self) -> &SystemModel {
        &self.model
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn rejected(&self) -> &[RejectedEvent] {
        &self.rejected
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    /// Bundle for the current state, posterior limited to `top` rows.
    pub fn bundle(&self, top: usize) -> ReportBundle {
        let label = self.events.last().map(|e| e.to_string());
        ReportBundle::new(&self.model, &self.prior, &self.belief, label).truncate_posterior(top)
    }

    /// Recomputes the belief from the model, `t0` and the event log.
    pub fn refold(&self) -> Result<BeliefState, DiagnosisError> {
        Ok(engine::run_events(&self.model, self.t0, &self.events)?.last().clone())
    }

    /// Applies `event`. On failure the log is left untouched and the event is
    /// recorded in the rejection journal.
    pub fn append(&mut self, event: Event) -> Result<(), ApiError> {
        match engine::apply_event(&self.model, &self.belief, &event) {
            Ok(step) => {
                if let Some(path) = &self.log {
                    append_line(path, &LogRecord::Event { event: event.clone() })
                        .map_err(|e| ApiError::internal(format!("cannot persist event: {e}")))?;
                }
                self.events.push(event);
                self.prior = step.prior;
                self.belief = step.posterior;
                Ok(())
            }
            Err(err) => {
                let api = ApiError::from(err);
                let rejected = RejectedEvent {
                    event,
                    code: api.code().to_string(),
                    message: api.body.message.clone(),
                };
                if let Some(path) = &self.journal {
                    if let Err(e) = append_line(path, &rejected) {
                        tracing::warn!(session = %self.id, "cannot write rejection journal: {e}");
                    }
                }
                self.rejected.push(rejected);
                Err(api)
            }
        }
    }

    /// Applies `events` to a copy of the current belief. Returns the belief
    /// before the last event's evidence and the resulting belief.
    pub fn what_if(&self, events: &[Event]) -> Result<(BeliefState, BeliefState), ApiError> {
        let mut prior = self.prior.clone();
        let mut belief = self.belief.clone();
        for (index, event) in events.iter().enumerate() {
            let step = engine::apply_event(&self.model, &belief, event).map_err(|e| DiagnosisError::AtEvent {
                index,
                source: Box::new(e),
            })?;
            prior = step.prior;
            belief = step.posterior;
        }
        Ok((prior, belief))
    }
}

pub type SessionHandle = Arc<RwLock<Session>>;

/// Every model and session known to one service instance.
#[derive(Debug)]
pub struct Store {
    config: ServiceConfig,
    models: RwLock<HashMap<String, Arc<StoredModel>>>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

pub fn read<T>(lock: &RwLock<T>) -> RwLockReadGuard<'_, T> {
    lock.read().unwrap_or_else(|e| e.into_inner())
}

pub fn write<T>(lock: &RwLock<T>) -> RwLockWriteGuard<'_, T> {
    lock.write().unwrap_or_else(|e| e.into_inner())
}

impl Store {
    /// In-memory store.
    pub fn new(config: ServiceConfig) -> Self {
        Store {
            config,
            models: RwLock::default(),
            sessions: RwLock::default(),
        }
    }

    /// Opens the store, reloading persisted models and refolding sessions
    /// when a data directory is configured.
    pub fn open(config: ServiceConfig) -> io::Result<Self> {
        let store = Store::new(config);
        let Some(dir) = store.config.data_dir.clone() else {
            return Ok(store);
        };
        fs::create_dir_all(dir.join("models"))?;
        fs::create_dir_all(dir.join("sessions"))?;

        for entry in fs::read_dir(dir.join("models"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let id = stem(&path);
                let document = ModelDocument::load(&path).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
                let model = store.build(&document).map_err(|e| invalid_data(&path, e))?;
                write(&store.models).insert(id.clone(), Arc::new(StoredModel { id, document, model }));
            }
        }

        for entry in fs::read_dir(dir.join("sessions"))? {
            let path = entry?.path();
            let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            if name.ends_with(".jsonl") && !name.ends_with(".rejected.jsonl") {
                let session = store.load_session(&path)?;
                write(&store.sessions).insert(session.id.clone(), Arc::new(RwLock::new(session)));
            }
        }
        Ok(store)
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    fn build(&self, document: &ModelDocument) -> Result<SystemModel, ApiError> {
        let model = document
            .to_model::<f64>()?
            .with_enumeration_cap(self.config.enumeration_cap);
        if !model.is_valid() {
            return Err(DiagnosisError::InvalidModel(model.validate()).into());
        }
        model.candidate_count()?;
        Ok(model)
    }

    fn load_session(&self, path: &Path) -> io::Result<Session> {
        let mut records = read_lines::<LogRecord>(path)?.into_iter();
        let Some(LogRecord::Header {
            session_id,
            model_id,
            model,
            t0,
        }) = records.next()
        else {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}: missing header", path.display()),
            ));
        };
        let mut session = self
            .new_session(session_id, model_id, model, t0)
            .map_err(|e| invalid_data(path, e))?;
        for record in records {
            let LogRecord::Event { event } = record else {
                return Err(io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}: repeated header", path.display()),
                ));
            };
            session.append(event).map_err(|e| invalid_data(path, e))?;
        }
        let journal = path.with_extension("rejected.jsonl");
        if journal.exists() {
            session.rejected = read_lines(&journal)?;
        }
        session.log = Some(path.to_path_buf());
        session.journal = Some(journal);
        Ok(session)
    }

    fn new_session(
        &self,
        id: String,
        model_id: Option<String>,
        document: ModelDocument,
        t0: f64,
    ) -> Result<Session, ApiError> {
        let model = self.build(&document)?;
        let belief = engine::initial_belief(&model, t0)?;
        Ok(Session {
            id,
            model_id,
            document,
            model,
            t0,
            events: Vec::new(),
            rejected: Vec::new(),
            prior: belief.clone(),
            belief,
            log: None,
            journal: None,
        })
    }

    /// Validates and stores a model document.
    pub fn register_model(&self, document: ModelDocument) -> Result<Arc<StoredModel>, ApiError> {
        let model = self.build(&document)?;
        let id = Uuid::new_v4().simple().to_string();
        if let Some(dir) = &self.config.data_dir {
            let text = serde_json::to_string_pretty(&document).map_err(|e| ApiError::internal(e.to_string()))?;
            fs::write(dir.join("models").join(format!("{id}.json")), text)
                .map_err(|e| ApiError::internal(format!("cannot persist model: {e}")))?;
        }
        let stored = Arc::new(StoredModel {
            id: id.clone(),
            document,
            model,
        });
        write(&self.models).insert(id, stored.clone());
        Ok(stored)
    }

    pub fn model(&self, id: &str) -> Result<Arc<StoredModel>, ApiError> {
        read(&self.models)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("model", id))
    }

    /// Starts a session from a stored model or an inline document.
    pub fn create_session(
        &self,
        model_id: Option<String>,
        document: Option<ModelDocument>,
        t0: f64,
    ) -> Result<SessionHandle, ApiError> {
        let document = match (&model_id, document) {
            (Some(id), None) => self.model(id)?.document.clone(),
            (None, Some(doc)) => doc,
            _ => {
                return Err(ApiError::new(
                    StatusCode::UNPROCESSABLE_ENTITY,
                    "invalid_request",
                    "exactly one of `model_id` and `model` is required",
                ))
            }
        };
        let id = Uuid::new_v4().simple().to_string();
        let mut session = self.new_session(id.clone(), model_id.clone(), document, t0)?;
        if let Some(dir) = &self.config.data_dir {
            let path = dir.join("sessions").join(format!("{id}.jsonl"));
            let header = LogRecord::Header {
                session_id: id.clone(),
                model_id,
                model: session.document.clone(),
                t0,
            };
            append_line(&path, &header).map_err(|e| ApiError::internal(format!("cannot persist session: {e}")))?;
            session.journal = Some(path.with_extension("rejected.jsonl"));
            session.log = Some(path);
        }
        let handle = Arc::new(RwLock::new(session));
        write(&self.sessions).insert(id, handle.clone());
        Ok(handle)
    }

    pub fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        read(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session", id))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = read(&self.sessions).keys().cloned().collect();
        ids.sort();
        ids
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string()
}

fn invalid_data(path: &Path, err: ApiError) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("{}: {}", path.display(), err.body.message),
    )
}
