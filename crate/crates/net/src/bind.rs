//! Exposes runtime skills over MQTT topics and HTTP resources.

use std::collections::{HashMap, VecDeque};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use aurcap_core::interface::{encode_segment, Endpoint, HttpEndpoint, InterfaceError, InterfaceKind, MqttEndpoint, SkillInterfaceDescriptor};
use aurcap_core::runtime::{CommandOutcome, Skill, StateEvent};
use aurcap_core::skill::TransitionCommand;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use parking_lot::{Mutex, RwLock};
use serde::Deserialize;
use thiserror::Error;
use tokio::sync::Notify;
use tokio::task::JoinHandle;
use tracing::{debug, warn};

use crate::broker::{Broker, BrokerError};
use crate::wire::{CommandMessage, Rejection, StateMessage};

#[derive(Debug, Error)]
pub enum BindError {
    #[error("cannot listen on {addr}: {reason}")]
    PortUnavailable { addr: String, reason: String },
    #[error(transparent)]
    Broker(#[from] BrokerError),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
}

/// Pending state messages waiting for the broker.
pub const STATE_BUFFER: usize = 1024;

struct StateBuffer {
    queue: Mutex<VecDeque<StateEvent>>,
    ready: Notify,
}

impl StateBuffer {
    fn push(&self, ev: StateEvent) {
        let mut q = self.queue.lock();
        if q.len() == STATE_BUFFER {
            let lost = q.pop_front();
            warn!(skill = %ev.skill, sequence = lost.map(|e| e.sequence), "state buffer full; dropped oldest");
        }
        q.push_back(ev);
        drop(q);
        self.ready.notify_one();
    }

    async fn pop(&self) -> StateEvent {
        loop {
            if let Some(ev) = self.queue.lock().pop_front() {
                return ev;
            }
            self.ready.notified().await;
        }
    }
}

/// Live MQTT binding of one skill; dropping it stops forwarding.
pub struct MqttBinding {
    pub descriptor: SkillInterfaceDescriptor,
    broker: Arc<dyn Broker>,
    tasks: Vec<JoinHandle<()>>,
}

impl MqttBinding {
    /// Stops forwarding and clears the retained state.
    pub async fn unbind(mut self) -> Result<(), BrokerError> {
        for t in self.tasks.drain(..) {
            t.abort();
        }
        if let Endpoint::Mqtt(e) = &self.descriptor.endpoint {
            self.broker.publish(&e.state_topic, Vec::new(), true).await?;
        }
        Ok(())
    }
}

impl Drop for MqttBinding {
    fn drop(&mut self) {
        for t in &self.tasks {
            t.abort();
        }
    }
}

/// Serves `skill` on the standard topics of `broker`.
pub async fn bind_mqtt(skill: Arc<Skill>, broker: Arc<dyn Broker>) -> Result<MqttBinding, BindError> {
    let endpoint = MqttEndpoint::for_skill(broker.uri(), skill.host(), skill.id())?;
    let descriptor = SkillInterfaceDescriptor {
        id: SkillInterfaceDescriptor::default_id(skill.id(), InterfaceKind::Mqtt).map_err(InterfaceError::from)?,
        skill: skill.id().clone(),
        endpoint: Endpoint::Mqtt(endpoint.clone()),
    };
    let mut commands = broker.subscribe(&endpoint.command_topic).await?;
    let buffer = Arc::new(StateBuffer {
        queue: Mutex::new(VecDeque::new()),
        ready: Notify::new(),
    });

    // Retain the current state before the descriptor is handed out.
    let mut events = skill.observe();
    if let Some(snapshot) = events.recv().await {
        broker
            .publish(&endpoint.state_topic, StateMessage::from(&snapshot).canonical().into_bytes(), true)
            .await?;
    }
    let feed = buffer.clone();
    let forward = tokio::spawn(async move {
        while let Some(ev) = events.recv().await {
            feed.push(ev);
        }
    });

    let (b, topic) = (broker.clone(), endpoint.state_topic.clone());
    let publish = tokio::spawn(async move {
        loop {
            let ev = buffer.pop().await;
            let payload = StateMessage::from(&ev).canonical().into_bytes();
            if let Err(e) = b.publish(&topic, payload, true).await {
                warn!(topic = %topic, error = %e, "state publish failed");
            }
        }
    });

    let (b, rejected_topic) = (broker.clone(), endpoint.rejected_topic());
    let serve = tokio::spawn(async move {
        while let Some(msg) = commands.recv().await {
            let rejection = match CommandMessage::parse(&msg.payload).and_then(|m| m.to_command().map(|c| (m, c))) {
                Err(e) => Some(Rejection::for_payload(&msg.payload, e.to_string())),
                Ok((m, cmd)) => match skill.command(cmd) {
                    CommandOutcome::Rejected { reason, .. } => Some(Rejection {
                        correlation_id: Some(m.correlation_id.to_string()),
                        reason,
                    }),
                    CommandOutcome::Accepted(_) => None,
                    CommandOutcome::Duplicate(_) => {
                        debug!(correlation = %m.correlation_id, "duplicate command ignored");
                        None
                    }
                },
            };
            if let Some(r) = rejection {
                if let Err(e) = b.publish(&rejected_topic, r.canonical().into_bytes(), false).await {
                    warn!(error = %e, "rejection publish failed");
                }
            }
        }
    });

    Ok(MqttBinding {
        descriptor,
        broker,
        tasks: vec![forward, publish, serve],
    })
}

/// Recent state messages of one skill, for `?after=` queries.
struct History {
    events: Mutex<VecDeque<StateMessage>>,
}

const HISTORY: usize = 256;

struct Hosted {
    skill: Arc<Skill>,
    history: Arc<History>,
    recorder: JoinHandle<()>,
}

impl Drop for Hosted {
    fn drop(&mut self) {
        self.recorder.abort();
    }
}

#[derive(Clone, Default)]
struct Served {
    skills: Arc<RwLock<HashMap<String, Hosted>>>,
    requests: Arc<AtomicU64>,
}

/// One HTTP listener serving any number of skills under `/skills/{name}`.
pub struct HttpSkillServer {
    base_url: String,
    served: Served,
    server: JoinHandle<()>,
}

impl Drop for HttpSkillServer {
    fn drop(&mut self) {
        self.server.abort();
    }
}

impl HttpSkillServer {
    pub async fn bind(addr: SocketAddr) -> Result<Self, BindError> {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| BindError::PortUnavailable {
            addr: addr.to_string(),
            reason: e.to_string(),
        })?;
        let local = listener.local_addr().map_err(|e| BindError::PortUnavailable {
            addr: addr.to_string(),
            reason: e.to_string(),
        })?;
        let served = Served::default();
        let app = router(served.clone());
        let server = tokio::spawn(async move {
            if let Err(e) = axum::serve(listener, app).await {
                warn!(error = %e, "skill http server stopped");
            }
        });
        Ok(HttpSkillServer {
            base_url: format!("http://{local}"),
            served,
            server,
        })
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    /// Requests served so far, any resource.
    pub fn requests(&self) -> u64 {
        self.served.requests.load(Ordering::SeqCst)
    }

    /// Serves `skill` and returns its descriptor.
    pub fn bind_http(&self, skill: Arc<Skill>) -> Result<SkillInterfaceDescriptor, BindError> {
        let endpoint = HttpEndpoint::for_skill(&self.base_url, skill.id())?;
        let descriptor = SkillInterfaceDescriptor {
            id: SkillInterfaceDescriptor::default_id(skill.id(), InterfaceKind::Http).map_err(InterfaceError::from)?,
            skill: skill.id().clone(),
            endpoint: Endpoint::Http(endpoint),
        };
        let history = Arc::new(History {
            events: Mutex::new(VecDeque::new()),
        });
        let mut events = skill.observe();
        let h = history.clone();
        let recorder = tokio::spawn(async move {
            while let Some(ev) = events.recv().await {
                let mut q = h.events.lock();
                if q.len() == HISTORY {
                    q.pop_front();
                }
                q.push_back(StateMessage::from(&ev));
            }
        });
        let key = encode_segment(skill.id().local_name())?;
        self.served.skills.write().insert(
            key,
            Hosted {
                skill,
                history,
                recorder,
            },
        );
        Ok(descriptor)
    }

    pub fn unbind_http(&self, descriptor: &SkillInterfaceDescriptor) {
        if let Ok(key) = encode_segment(descriptor.skill.local_name()) {
            self.served.skills.write().remove(&key);
        }
    }
}

fn router(served: Served) -> Router {
    Router::new()
        .route("/skills/{skill}/transitions/{command}", post(transition))
        .route("/skills/{skill}/state", get(state))
        .route("/skills/{skill}/description", get(description))
        .with_state(served)
}

fn error(status: StatusCode, reason: impl Into<String>) -> Response {
    (
        status,
        Json(Rejection {
            correlation_id: None,
            reason: reason.into(),
        }),
    )
        .into_response()
}

fn lookup(served: &Served, name: &str) -> Option<(Arc<Skill>, Arc<History>)> {
    served.requests.fetch_add(1, Ordering::SeqCst);
    served.skills.read().get(name).map(|h| (h.skill.clone(), h.history.clone()))
}

async fn transition(State(served): State<Served>, Path((name, command)): Path<(String, String)>, body: Bytes) -> Response {
    let Some((skill, _)) = lookup(&served, &name) else {
        return error(StatusCode::NOT_FOUND, format!("no skill `{name}`"));
    };
    let Some(kind) = TransitionCommand::parse(&command) else {
        return error(StatusCode::NOT_FOUND, format!("no transition `{command}`"));
    };
    let msg = if body.iter().all(u8::is_ascii_whitespace) {
        CommandMessage::new(kind)
    } else {
        match CommandMessage::parse(&body) {
            Ok(m) if m.command == kind => m,
            Ok(m) => return error(StatusCode::BAD_REQUEST, format!("body command `{}` does not match path", m.command)),
            Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
        }
    };
    let cmd = match msg.to_command() {
        Ok(c) => c,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    match skill.command(cmd) {
        CommandOutcome::Accepted(ev) => (StatusCode::ACCEPTED, Json(StateMessage::from(&ev))).into_response(),
        CommandOutcome::Duplicate(ev) => (StatusCode::OK, Json(StateMessage::from(&ev))).into_response(),
        CommandOutcome::Rejected { reason, .. } => (
            StatusCode::CONFLICT,
            Json(Rejection {
                correlation_id: Some(msg.correlation_id.to_string()),
                reason,
            }),
        )
            .into_response(),
    }
}

#[derive(Deserialize)]
struct StateQuery {
    after: Option<u64>,
}

/// Current state, or with `?after=n` the retained messages with a larger sequence.
async fn state(State(served): State<Served>, Path(name): Path<String>, Query(q): Query<StateQuery>) -> Response {
    let Some((skill, history)) = lookup(&served, &name) else {
        return error(StatusCode::NOT_FOUND, format!("no skill `{name}`"));
    };
    match q.after {
        None => Json(StateMessage::from(&skill.snapshot())).into_response(),
        Some(after) => {
            let newer: Vec<StateMessage> = history.events.lock().iter().filter(|m| m.sequence > after).cloned().collect();
            Json(newer).into_response()
        }
    }
}

async fn description(State(served): State<Served>, Path(name): Path<String>) -> Response {
    if lookup(&served, &name).is_none() {
        return error(StatusCode::NOT_FOUND, format!("no skill `{name}`"));
    }
    ([(header::CONTENT_TYPE, "application/vnd.sun.wadl+xml")], wadl(&name)).into_response()
}

/// WADL listing the eight transition resources and the state resource.
pub fn wadl(skill_segment: &str) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<application xmlns=\"http://wadl.dev.java.net/2009/02\">\n");
    out.push_str(&format!("  <resources base=\"/skills/{skill_segment}/\">\n"));
    for cmd in TransitionCommand::ALL {
        out.push_str(&format!(
            "    <resource path=\"transitions/{0}\">\n      <method name=\"POST\" id=\"{0}\">\n        <request><representation mediaType=\"application/json\"/></request>\n        <response status=\"202\"><representation mediaType=\"application/json\"/></response>\n        <response status=\"409\"><representation mediaType=\"application/json\"/></response>\n      </method>\n    </resource>\n",
            cmd.name()
        ));
    }
    out.push_str("    <resource path=\"state\">\n      <method name=\"GET\" id=\"state\">\n        <request><param name=\"after\" style=\"query\" type=\"xsd:unsignedLong\" required=\"false\"/></request>\n        <response status=\"200\"><representation mediaType=\"application/json\"/></response>\n      </method>\n    </resource>\n");
    out.push_str("  </resources>\n</application>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wadl_lists_nine_resources() {
        let doc = wadl("fly");
        assert_eq!(doc.matches("<resource ").count(), 9);
        assert_eq!(doc.matches("method name=\"POST\"").count(), 8);
        assert!(doc.contains("path=\"transitions/unsuspend\""));
    }
}
