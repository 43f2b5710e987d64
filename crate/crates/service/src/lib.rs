//! HTTP API for live diagnosis sessions.
//!
//! A session holds a model, a start time and an append-only event log; its
//! belief is the fold of that log. Mutating requests on one session are
//! serialized, reads run concurrently and sessions never block each other.
//!
//! | Method | Path | |
//! |---|---|---|
//! | POST | `/models` | validate and store a model document |
//! | POST | `/sessions` | `{model_id \| model, t0}` |
//! | GET | `/sessions/{id}` | summary with the current bundle |
//! | POST | `/sessions/{id}/events` | append one observe or repair event |
//! | GET | `/sessions/{id}/belief?top=k` | posterior rows and marginals |
//! | GET | `/sessions/{id}/decisions` | ranked decisions and factored optimum |
//! | POST | `/sessions/{id}/whatif` | `{events}` evaluated on a copy |
//!
//! Errors are `{"code", "message"}` bodies with a matching status.

pub mod api;
pub mod error;
pub mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use faultline_core::{Event, ModelDocument, ReportBundle};
use serde::de::DeserializeOwned;
use serde::Deserialize;

pub use api::*;
pub use error::{ApiError, ErrorBody};
pub use store::{RejectedEvent, ServiceConfig, Session, Store};

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Deserialize)]
struct TopQuery {
    top: Option<usize>,
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(format!("invalid request body: {e}")))
}

fn top(store: &Store, query: Result<Query<TopQuery>, QueryRejection>) -> ApiResult<usize> {
    let Query(q) = query.map_err(|e| ApiError::malformed(e.body_text()))?;
    Ok(q.top.unwrap_or(store.config().default_top))
}

pub fn router(store: Arc<Store>) -> Router {
    Router::new()
        .route("/models", post(create_model))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(append_event))
        .route("/sessions/{id}/belief", get(get_belief))
        .route("/sessions/{id}/decisions", get(get_decisions))
        .route("/sessions/{id}/whatif", post(what_if))
        .with_state(store)
}

async fn create_model(State(store): State<Arc<Store>>, body: Bytes) -> ApiResult<(StatusCode, Json<ModelCreated>)> {
    let document: ModelDocument = parse(&body)?;
    let stored = store.register_model(document)?;
    let created = ModelCreated {
        model_id: stored.id.clone(),
        components: stored.model.component_ids().into_iter().map(String::from).collect(),
        variables: stored.model.variables().iter().map(|v| v.name.clone()).collect(),
    };
    Ok((StatusCode::CREATED, Json(created)))
}

async fn create_session(
    State(store): State<Arc<Store>>,
    query: Result<Query<TopQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    let k = top(&store, query)?;
    let req: CreateSession = parse(&body)?;
    let handle = store.create_session(req.model_id, req.model, req.t0)?;
    let summary = SessionSummary::of(&store::read(&handle), k);
    Ok((StatusCode::CREATED, Json(summary)))
}

async fn get_session(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    query: Result<Query<TopQuery>, QueryRejection>,
) -> ApiResult<Json<SessionSummary>> {
    let k = top(&store, query)?;
    let handle = store.session(&id)?;
    let summary = SessionSummary::of(&store::read(&handle), k);
    Ok(Json(summary))
}

async fn append_event(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    query: Result<Query<TopQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult<Json<SessionSummary>> {
    let k = top(&store, query)?;
    let event: Event = parse(&body)?;
    let handle = store.session(&id)?;
    let mut session = store::write(&handle);
    session.append(event)?;
    Ok(Json(SessionSummary::of(&session, k)))
}

async fn get_belief(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    query: Result<Query<TopQuery>, QueryRejection>,
) -> ApiResult<Json<BeliefView>> {
    let k = top(&store, query)?;
    let handle = store.session(&id)?;
    let session = store::read(&handle);
    let bundle = session.bundle(k);
    Ok(Json(BeliefView {
        session_id: id,
        time: bundle.time,
        candidates: session.belief().weights().len(),
        posterior: bundle.posterior,
        marginals: bundle.marginals,
    }))
}

async fn get_decisions(State(store): State<Arc<Store>>, Path(id): Path<String>) -> ApiResult<Json<DecisionsView>> {
    let handle = store.session(&id)?;
    let bundle = store::read(&handle).bundle(0);
    Ok(Json(DecisionsView::of(&id, bundle)))
}

async fn what_if(
    State(store): State<Arc<Store>>,
    Path(id): Path<String>,
    query: Result<Query<TopQuery>, QueryRejection>,
    body: Bytes,
) -> ApiResult<Json<WhatIfResult>> {
    let k = top(&store, query)?;
    let req: WhatIf = parse(&body)?;
    let handle = store.session(&id)?;
    let session = store::read(&handle);
    let (prior, belief) = session.what_if(&req.events)?;
    let label = req.events.last().map(|e| e.to_string());
    let bundle = ReportBundle::new(session.model(), &prior, &belief, label).truncate_posterior(k);
    Ok(Json(WhatIfResult {
        session_id: id,
        committed_time: session.belief().time(),
        bundle,
    }))
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, store: Arc<Store>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
