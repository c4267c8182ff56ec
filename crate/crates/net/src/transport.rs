//! Client side of skill interfaces: transports keyed by interface kind.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use aurcap_core::interface::{Endpoint, HttpEndpoint, MqttEndpoint, SkillInterfaceDescriptor};
use aurcap_core::Iri;
use reqwest::StatusCode;
use thiserror::Error;
use tokio::sync::mpsc;
use tokio::time::{timeout_at, Instant};
use tracing::{debug, warn};
use uuid::Uuid;

use crate::broker::{BrokerError, BrokerRegistry, Publish};
use crate::wire::{CommandMessage, Rejection, StateMessage};

pub const DEFAULT_DEADLINE: Duration = Duration::from_secs(30);
pub const POLL_INTERVAL: Duration = Duration::from_millis(100);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvokeError {
    #[error("no transport registered for `{0}`")]
    NoTransport(String),
    #[error("descriptor {0} does not fit this transport")]
    WrongEndpoint(Iri),
    #[error("no answer within {0:?}")]
    Timeout(Duration),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("request refused: {0}")]
    BadRequest(String),
    #[error("state feed closed")]
    Closed,
    #[error(transparent)]
    Broker(#[from] BrokerError),
}

/// Raw source of state messages behind a [`StateFeed`].
#[async_trait]
pub trait StateSource: Send {
    async fn recv(&mut self) -> Result<StateMessage, InvokeError>;
}

/// State messages of one skill with increasing sequence numbers; the first is the state at subscription.
pub struct StateFeed {
    source: Box<dyn StateSource>,
    last: Option<u64>,
    deadline: Duration,
}

impl StateFeed {
    pub fn new(source: Box<dyn StateSource>, deadline: Duration) -> Self {
        StateFeed {
            source,
            last: None,
            deadline,
        }
    }

    /// Next newer message; `Timeout` if none arrives within the deadline.
    pub async fn next(&mut self) -> Result<StateMessage, InvokeError> {
        let until = Instant::now() + self.deadline;
        loop {
            let msg = timeout_at(until, self.source.recv())
                .await
                .map_err(|_| InvokeError::Timeout(self.deadline))??;
            if self.last.is_some_and(|l| msg.sequence <= l) {
                continue;
            }
            self.last = Some(msg.sequence);
            return Ok(msg);
        }
    }
}

#[async_trait]
pub trait SkillTransport: Send + Sync {
    /// Opens a state feed for the skill behind `descriptor`.
    async fn watch(&self, descriptor: &SkillInterfaceDescriptor, deadline: Duration) -> Result<StateFeed, InvokeError>;
    /// Delivers `cmd`; returns once the skill accepted it.
    async fn send(&self, descriptor: &SkillInterfaceDescriptor, cmd: &CommandMessage, deadline: Duration) -> Result<(), InvokeError>;
}

#[derive(Default, Clone)]
pub struct TransportRegistry {
    transports: HashMap<String, Arc<dyn SkillTransport>>,
}

impl TransportRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// MQTT over `brokers` and HTTP.
    pub fn standard(brokers: Arc<BrokerRegistry>) -> Self {
        let mut r = TransportRegistry::new();
        r.register("mqtt", Arc::new(MqttTransport::new(brokers)));
        r.register("http", Arc::new(HttpTransport::new()));
        r
    }

    pub fn register(&mut self, kind: &str, transport: Arc<dyn SkillTransport>) {
        self.transports.insert(kind.to_string(), transport);
    }

    pub fn get(&self, kind: &str) -> Result<Arc<dyn SkillTransport>, InvokeError> {
        self.transports
            .get(kind)
            .cloned()
            .ok_or_else(|| InvokeError::NoTransport(kind.to_string()))
    }

    pub fn for_descriptor(&self, d: &SkillInterfaceDescriptor) -> Result<Arc<dyn SkillTransport>, InvokeError> {
        self.get(d.kind().name())
    }

    pub fn kinds(&self) -> Vec<String> {
        let mut k: Vec<_> = self.transports.keys().cloned().collect();
        k.sort();
        k
    }
}

/// An accepted command and the states that follow it.
pub struct Invocation {
    pub correlation_id: Uuid,
    /// State before the command.
    pub before: StateMessage,
    pub feed: StateFeed,
}

/// Sends `cmd` through the transport registered for the descriptor's kind.
/// Subscribes before sending so no resulting state is missed.
pub async fn invoke_remote(
    transports: &TransportRegistry,
    descriptor: &SkillInterfaceDescriptor,
    cmd: CommandMessage,
    deadline: Duration,
) -> Result<Invocation, InvokeError> {
    let transport = transports.for_descriptor(descriptor)?;
    let mut feed = transport.watch(descriptor, deadline).await?;
    let before = feed.next().await?;
    transport.send(descriptor, &cmd, deadline).await?;
    Ok(Invocation {
        correlation_id: cmd.correlation_id,
        before,
        feed,
    })
}

fn mqtt_endpoint(d: &SkillInterfaceDescriptor) -> Result<&MqttEndpoint, InvokeError> {
    match &d.endpoint {
        Endpoint::Mqtt(e) => Ok(e),
        _ => Err(InvokeError::WrongEndpoint(d.id.clone())),
    }
}

fn http_endpoint(d: &SkillInterfaceDescriptor) -> Result<&HttpEndpoint, InvokeError> {
    match &d.endpoint {
        Endpoint::Http(e) => Ok(e),
        _ => Err(InvokeError::WrongEndpoint(d.id.clone())),
    }
}

pub struct MqttTransport {
    brokers: Arc<BrokerRegistry>,
}

impl MqttTransport {
    pub fn new(brokers: Arc<BrokerRegistry>) -> Self {
        MqttTransport { brokers }
    }
}

struct MqttSource {
    rx: mpsc::UnboundedReceiver<Publish>,
}

#[async_trait]
impl StateSource for MqttSource {
    async fn recv(&mut self) -> Result<StateMessage, InvokeError> {
        loop {
            let p = self.rx.recv().await.ok_or(InvokeError::Closed)?;
            if p.payload.is_empty() {
                continue;
            }
            match StateMessage::parse(&p.payload) {
                Ok(m) => return Ok(m),
                Err(e) => warn!(topic = %p.topic, error = %e, "ignoring malformed state message"),
            }
        }
    }
}

#[async_trait]
impl SkillTransport for MqttTransport {
    async fn watch(&self, d: &SkillInterfaceDescriptor, deadline: Duration) -> Result<StateFeed, InvokeError> {
        let e = mqtt_endpoint(d)?;
        let broker = self.brokers.connect(&e.broker_uri).await?;
        let rx = broker.subscribe(&e.state_topic).await?;
        Ok(StateFeed::new(Box::new(MqttSource { rx }), deadline))
    }

    async fn send(&self, d: &SkillInterfaceDescriptor, cmd: &CommandMessage, deadline: Duration) -> Result<(), InvokeError> {
        let e = mqtt_endpoint(d)?;
        let broker = self.brokers.connect(&e.broker_uri).await?;
        let mut states = broker.subscribe(&e.state_topic).await?;
        let mut rejections = broker.subscribe(&e.rejected_topic()).await?;
        broker.publish(&e.command_topic, cmd.canonical().into_bytes(), false).await?;
        let ours = cmd.correlation_id.to_string();
        let until = Instant::now() + deadline;
        loop {
            let next = timeout_at(until, async {
                tokio::select! {
                    s = states.recv() => s.map(|p| (true, p)),
                    r = rejections.recv() => r.map(|p| (false, p)),
                }
            });
            let (is_state, p) = next.await.map_err(|_| InvokeError::Timeout(deadline))?.ok_or(InvokeError::Closed)?;
            if is_state {
                if StateMessage::parse(&p.payload).is_ok_and(|m| m.correlation_id.as_deref() == Some(&ours)) {
                    return Ok(());
                }
            } else if let Ok(r) = serde_json::from_slice::<Rejection>(&p.payload) {
                if r.correlation_id.as_deref() == Some(&ours) {
                    return Err(InvokeError::Rejected(r.reason));
                }
            }
        }
    }
}

pub struct HttpTransport {
    client: reqwest::Client,
}

impl Default for HttpTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl HttpTransport {
    pub fn new() -> Self {
        HttpTransport {
            client: reqwest::Client::new(),
        }
    }
}

struct HttpSource {
    client: reqwest::Client,
    url: String,
    last: Option<u64>,
    pending: VecDeque<StateMessage>,
}

impl HttpSource {
    async fn fetch(&self) -> Result<Vec<StateMessage>, reqwest::Error> {
        let req = match self.last {
            None => self.client.get(&self.url),
            Some(n) => self.client.get(format!("{}?after={n}", self.url)),
        };
        let resp = req.send().await?.error_for_status()?;
        match self.last {
            None => Ok(vec![resp.json::<StateMessage>().await?]),
            Some(_) => resp.json::<Vec<StateMessage>>().await,
        }
    }
}

#[async_trait]
impl StateSource for HttpSource {
    async fn recv(&mut self) -> Result<StateMessage, InvokeError> {
        loop {
            if let Some(m) = self.pending.pop_front() {
                self.last = Some(m.sequence);
                return Ok(m);
            }
            if self.last.is_some() {
                tokio::time::sleep(POLL_INTERVAL).await;
            }
            match self.fetch().await {
                Ok(batch) => self.pending.extend(batch),
                Err(e) => {
                    debug!(url = %self.url, error = %e, "state poll failed");
                    if self.last.is_none() {
                        tokio::time::sleep(POLL_INTERVAL).await;
                    }
                }
            }
        }
    }
}

#[async_trait]
impl SkillTransport for HttpTransport {
    async fn watch(&self, d: &SkillInterfaceDescriptor, deadline: Duration) -> Result<StateFeed, InvokeError> {
        let e = http_endpoint(d)?;
        let mut source = HttpSource {
            client: self.client.clone(),
            url: format!("{}/state", e.skill_url()),
            last: None,
            pending: VecDeque::new(),
        };
        // Take the subscription snapshot now, not on the first read.
        let until = Instant::now() + deadline;
        loop {
            match timeout_at(until, source.fetch()).await.map_err(|_| InvokeError::Timeout(deadline))? {
                Ok(batch) => {
                    source.pending.extend(batch);
                    break;
                }
                Err(err) => {
                    debug!(url = %source.url, error = %err, "state fetch failed; retrying");
                    timeout_at(until, tokio::time::sleep(POLL_INTERVAL))
                        .await
                        .map_err(|_| InvokeError::Timeout(deadline))?;
                }
            }
        }
        Ok(StateFeed::new(Box::new(source), deadline))
    }

    async fn send(&self, d: &SkillInterfaceDescriptor, cmd: &CommandMessage, deadline: Duration) -> Result<(), InvokeError> {
        let e = http_endpoint(d)?;
        let url = format!("{}/transitions/{}", e.skill_url(), cmd.command.name());
        let body = cmd.canonical();
        let until = Instant::now() + deadline;
        loop {
            let attempt = self
                .client
                .post(&url)
                .header(reqwest::header::CONTENT_TYPE, "application/json")
                .body(body.clone())
                .send();
            let resp = match timeout_at(until, attempt).await.map_err(|_| InvokeError::Timeout(deadline))? {
                Ok(r) => r,
                Err(err) => {
                    debug!(url = %url, error = %err, "command post failed; retrying");
                    timeout_at(until, tokio::time::sleep(POLL_INTERVAL))
                        .await
                        .map_err(|_| InvokeError::Timeout(deadline))?;
                    continue;
                }
            };
            let status = resp.status();
            let reason = || async { resp.json::<Rejection>().await.map(|r| r.reason).unwrap_or_else(|e| e.to_string()) };
            return match status {
                StatusCode::ACCEPTED | StatusCode::OK => Ok(()),
                StatusCode::CONFLICT => Err(InvokeError::Rejected(reason().await)),
                _ => Err(InvokeError::BadRequest(format!("{status}: {}", reason().await))),
            };
        }
    }
}
