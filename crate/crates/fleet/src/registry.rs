//! Registry service: models, robots and missions over HTTP.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use aurcap_core::capability::capabilities_provided_by;
use aurcap_core::mission::{parse_mission, MissionError};
use aurcap_core::planner::{plan, Plan, PlanError, PlannerConfig};
use aurcap_core::structure::{modality_of, registered_robots, Modality};
use aurcap_core::vocab::{aur_cap, vdi3682};
use aurcap_core::{parse_turtle, Iri, KbError, KnowledgeBase};
use aurcap_net::{ExecuteError, ExecutionReport, Executor, Progress, TransportRegistry};
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;
use tokio::task::JoinHandle;

use crate::views::{MissionView, PlanView, RobotView};

#[derive(Debug, Error)]
pub enum SubmitError {
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Error, PartialEq)]
pub enum StartError {
    #[error("no mission `{0}`")]
    UnknownMission(String),
    #[error("mission `{0}` was already started")]
    AlreadyStarted(String),
    #[error(transparent)]
    Execute(#[from] ExecuteError),
}

struct MissionRecord {
    mission: Iri,
    plan: Plan,
    progress: Option<Progress>,
    error: Arc<Mutex<Option<String>>>,
}

pub struct Registry {
    kb: RwLock<KnowledgeBase>,
    missions: Mutex<BTreeMap<String, MissionRecord>>,
    executor: Executor,
    planner: PlannerConfig,
}

impl Registry {
    pub fn new(kb: KnowledgeBase, transports: Arc<TransportRegistry>) -> Arc<Self> {
        Arc::new(Registry {
            kb: RwLock::new(kb),
            missions: Mutex::new(BTreeMap::new()),
            executor: Executor::new(transports),
            planner: PlannerConfig::default(),
        })
    }

    pub fn kb(&self) -> &RwLock<KnowledgeBase> {
        &self.kb
    }

    /// Parses and merges a Turtle document; returns the number of new statements.
    pub fn add_model(&self, text: &str) -> Result<usize, KbError> {
        let doc = parse_turtle(text)?;
        let mut kb = self.kb.write();
        let before = kb.assertion_count() + kb.axiom_count();
        kb.merge(&doc)?;
        Ok(kb.assertion_count() + kb.axiom_count() - before)
    }

    /// Robots, optionally filtered by a provided capability type and by modality.
    pub fn robots(&self, capability_type: Option<&Iri>, modality: Option<Modality>) -> Vec<RobotView> {
        let kb = self.kb.read();
        registered_robots(&kb)
            .into_iter()
            .filter(|r| modality.is_none_or(|m| modality_of(&kb, r) == Some(m)))
            .filter(|r| {
                capability_type.is_none_or(|t| capabilities_provided_by(&kb, r).iter().any(|c| kb.is_instance_of(c, t)))
            })
            .map(|r| RobotView::describe(&kb, &r))
            .collect()
    }

    /// Plans a mission document and stores it under a fresh id. Never contacts a skill.
    pub fn submit(&self, text: &str) -> Result<(String, Plan), SubmitError> {
        let mission = parse_mission(text)?;
        let plan = plan(&self.kb.read(), &mission, self.planner)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        self.missions.lock().insert(
            id.clone(),
            MissionRecord {
                mission: mission.id,
                plan: plan.clone(),
                progress: None,
                error: Arc::new(Mutex::new(None)),
            },
        );
        Ok((id, plan))
    }

    /// Starts executing a submitted mission in the background.
    pub fn start(self: &Arc<Self>, id: &str) -> Result<JoinHandle<()>, StartError> {
        let mut missions = self.missions.lock();
        let record = missions.get_mut(id).ok_or_else(|| StartError::UnknownMission(id.to_string()))?;
        if record.progress.is_some() {
            return Err(StartError::AlreadyStarted(id.to_string()));
        }
        let run = self.executor.prepare(&record.plan)?;
        let progress: Progress = Arc::new(Mutex::new(ExecutionReport::pending(&record.plan)));
        record.progress = Some(progress.clone());
        let error = record.error.clone();
        Ok(tokio::spawn(async move {
            if let Err(e) = run.run(progress).await {
                *error.lock() = Some(e.to_string());
            }
        }))
    }

    pub fn mission(&self, id: &str) -> Option<MissionView> {
        let missions = self.missions.lock();
        let r = missions.get(id)?;
        let error = r.error.lock().clone();
        let view = MissionView {
            id: id.to_string(),
            mission: r.mission.clone(),
            plan: PlanView::from(&r.plan),
            report: r.progress.as_ref().map(|p| p.lock().clone()),
            error,
        };
        Some(view)
    }

    pub fn router(self: &Arc<Self>) -> Router {
        Router::new()
            .route("/registry/models", post(post_model))
            .route("/registry/robots", get(get_robots))
            .route("/missions", post(post_mission))
            .route("/missions/{id}", get(get_mission))
            .route("/missions/{id}/execute", post(post_execute))
            .with_state(self.clone())
    }
}

/// Serves the registry on `addr`; returns the bound address.
pub async fn serve(registry: Arc<Registry>, addr: SocketAddr) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let app = registry.router();
    let handle = tokio::spawn(async move {
        if let Err(e) = axum::serve(listener, app).await {
            tracing::error!(error = %e, "registry server stopped");
        }
    });
    Ok((local, handle))
}

fn problem(status: StatusCode, body: Value) -> Response {
    (status, Json(body)).into_response()
}

/// JSON body describing a knowledge-base error, with position for syntax errors.
pub fn kb_error_json(e: &KbError) -> Value {
    match e {
        KbError::Syntax { line, column, message } => json!({"error": "Syntax", "message": message, "line": line, "column": column}),
        other => json!({"error": "Model", "message": other.to_string()}),
    }
}

/// JSON body for a failed submission, naming the unsatisfiable step if any.
pub fn submit_error_json(e: &SubmitError) -> (StatusCode, Value) {
    match e {
        SubmitError::Plan(PlanError::Unsatisfiable(step)) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({"error": "Unsatisfiable", "step": step, "message": e.to_string()}),
        ),
        SubmitError::Plan(PlanError::CyclicMission(steps)) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({"error": "CyclicMission", "steps": steps, "message": e.to_string()}),
        ),
        SubmitError::Plan(PlanError::Match(m)) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            json!({"error": "Match", "message": m.to_string()}),
        ),
        SubmitError::Mission(MissionError::Kb(k)) => (StatusCode::BAD_REQUEST, kb_error_json(k)),
        SubmitError::Mission(m) => (StatusCode::BAD_REQUEST, json!({"error": "Mission", "message": m.to_string()})),
    }
}

fn utf8(body: &Bytes) -> Result<&str, Response> {
    std::str::from_utf8(body)
        .map_err(|e| problem(StatusCode::BAD_REQUEST, json!({"error": "Encoding", "message": e.to_string()})))
}

async fn post_model(State(reg): State<Arc<Registry>>, body: Bytes) -> Response {
    let text = match utf8(&body) {
        Ok(t) => t,
        Err(r) => return r,
    };
    match reg.add_model(text) {
        Ok(added) => problem(StatusCode::CREATED, json!({ "added": added })),
        Err(e) => problem(StatusCode::BAD_REQUEST, kb_error_json(&e)),
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RobotQuery {
    capability_type: Option<String>,
    modality: Option<String>,
}

/// Accepts a full IRI, a prefixed name, or a bare capability type name.
pub fn resolve_capability_type(kb: &KnowledgeBase, text: &str) -> Option<Iri> {
    let iri = if text.contains(':') {
        kb.expand(text).ok()?
    } else {
        Iri::new(format!("{}{text}", aur_cap::NS)).ok()?
    };
    (kb.contains_term(&iri) && kb.is_subclass_of(&iri, &vdi3682::PROCESS_OPERATOR).unwrap_or(false)).then_some(iri)
}

async fn get_robots(State(reg): State<Arc<Registry>>, Query(q): Query<RobotQuery>) -> Response {
    let capability_type = match q.capability_type.as_deref() {
        None => None,
        Some(t) => match resolve_capability_type(&reg.kb.read(), t) {
            Some(iri) => Some(iri),
            None => return problem(StatusCode::BAD_REQUEST, json!({"error": "UnknownCapabilityType", "message": t})),
        },
    };
    let modality = match q.modality.as_deref() {
        None => None,
        Some(m) => match Modality::parse(m) {
            Some(m) => Some(m),
            None => return problem(StatusCode::BAD_REQUEST, json!({"error": "UnknownModality", "message": m})),
        },
    };
    Json(reg.robots(capability_type.as_ref(), modality)).into_response()
}

async fn post_mission(State(reg): State<Arc<Registry>>, body: Bytes) -> Response {
    let text = match utf8(&body) {
        Ok(t) => t,
        Err(r) => return r,
    };
    match reg.submit(text) {
        Ok((id, plan)) => (
            StatusCode::CREATED,
            [(header::LOCATION, format!("/missions/{id}"))],
            Json(json!({"id": id, "mission": plan.mission, "plan": PlanView::from(&plan)})),
        )
            .into_response(),
        Err(e) => {
            let (status, body) = submit_error_json(&e);
            problem(status, body)
        }
    }
}

async fn post_execute(State(reg): State<Arc<Registry>>, Path(id): Path<String>) -> Response {
    match reg.start(&id) {
        Ok(_) => problem(StatusCode::ACCEPTED, json!({"id": id, "status": "Running"})),
        Err(StartError::UnknownMission(_)) => problem(StatusCode::NOT_FOUND, json!({"error": "UnknownMission", "message": id})),
        Err(e) => problem(StatusCode::CONFLICT, json!({"error": "Conflict", "message": e.to_string()})),
    }
}

async fn get_mission(State(reg): State<Arc<Registry>>, Path(id): Path<String>) -> Response {
    match reg.mission(&id) {
        Some(view) => Json(view).into_response(),
        None => problem(StatusCode::NOT_FOUND, json!({"error": "UnknownMission", "message": id})),
    }
}
