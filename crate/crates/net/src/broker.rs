//! Publish/subscribe brokers behind one trait, selected by URI scheme.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use async_trait::async_trait;
use parking_lot::Mutex;
use thiserror::Error;
use tokio::sync::mpsc;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BrokerError {
    #[error("invalid topic `{0}`")]
    InvalidTopic(String),
    #[error("invalid topic filter `{0}`")]
    InvalidFilter(String),
    #[error("no broker backend for `{0}`")]
    UnsupportedScheme(String),
    #[error("broker unreachable: {0}")]
    Unreachable(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Publish {
    pub topic: String,
    pub payload: Vec<u8>,
    pub retain: bool,
}

/// QoS 1 delivery is assumed throughout; an empty retained payload clears the retained message.
#[async_trait]
pub trait Broker: Send + Sync {
    fn uri(&self) -> &str;
    async fn publish(&self, topic: &str, payload: Vec<u8>, retain: bool) -> Result<(), BrokerError>;
    /// Matching retained messages arrive first. Dropping the receiver unsubscribes.
    async fn subscribe(&self, filter: &str) -> Result<mpsc::UnboundedReceiver<Publish>, BrokerError>;
}

pub fn validate_topic(topic: &str) -> Result<(), BrokerError> {
    if topic.is_empty() || topic.contains(['+', '#', '\0']) {
        return Err(BrokerError::InvalidTopic(topic.to_string()));
    }
    Ok(())
}

pub fn validate_filter(filter: &str) -> Result<(), BrokerError> {
    let levels: Vec<&str> = filter.split('/').collect();
    let ok = !filter.is_empty()
        && !filter.contains('\0')
        && levels.iter().enumerate().all(|(i, l)| match *l {
            "#" => i + 1 == levels.len(),
            "+" => true,
            l => !l.contains(['+', '#']),
        });
    if ok {
        Ok(())
    } else {
        Err(BrokerError::InvalidFilter(filter.to_string()))
    }
}

pub fn topic_matches(filter: &str, topic: &str) -> bool {
    let mut f = filter.split('/');
    let mut t = topic.split('/');
    loop {
        match (f.next(), t.next()) {
            (Some("#"), _) => return true,
            (Some("+"), Some(_)) => {}
            (Some(a), Some(b)) if a == b => {}
            (None, None) => return true,
            _ => return false,
        }
    }
}

struct Subscriber {
    filter: String,
    tx: mpsc::UnboundedSender<Publish>,
}

/// Broker living inside the process; used for tests and single-process fleets.
pub struct InProcessBroker {
    uri: String,
    retained: Mutex<HashMap<String, Vec<u8>>>,
    subscribers: Mutex<Vec<Subscriber>>,
    published: AtomicU64,
}

impl InProcessBroker {
    pub fn new(uri: impl Into<String>) -> Arc<Self> {
        Arc::new(InProcessBroker {
            uri: uri.into(),
            retained: Mutex::new(HashMap::new()),
            subscribers: Mutex::new(Vec::new()),
            published: AtomicU64::new(0),
        })
    }

    /// Messages published so far.
    pub fn published(&self) -> u64 {
        self.published.load(Ordering::SeqCst)
    }

    pub fn retained(&self, topic: &str) -> Option<Vec<u8>> {
        self.retained.lock().get(topic).cloned()
    }
}

#[async_trait]
impl Broker for InProcessBroker {
    fn uri(&self) -> &str {
        &self.uri
    }

    async fn publish(&self, topic: &str, payload: Vec<u8>, retain: bool) -> Result<(), BrokerError> {
        validate_topic(topic)?;
        self.published.fetch_add(1, Ordering::SeqCst);
        // retained map and fan-out under one lock order so a concurrent subscriber
        // sees either the retained copy or the live message, never neither
        let mut subs = self.subscribers.lock();
        if retain {
            let mut retained = self.retained.lock();
            if payload.is_empty() {
                retained.remove(topic);
            } else {
                retained.insert(topic.to_string(), payload.clone());
            }
        }
        let msg = Publish {
            topic: topic.to_string(),
            payload,
            retain: false,
        };
        subs.retain(|s| !s.tx.is_closed());
        for s in subs.iter().filter(|s| topic_matches(&s.filter, topic)) {
            let _ = s.tx.send(msg.clone());
        }
        Ok(())
    }

    async fn subscribe(&self, filter: &str) -> Result<mpsc::UnboundedReceiver<Publish>, BrokerError> {
        validate_filter(filter)?;
        let (tx, rx) = mpsc::unbounded_channel();
        let mut subs = self.subscribers.lock();
        let retained = self.retained.lock();
        let mut topics: Vec<_> = retained.keys().filter(|t| topic_matches(filter, t)).collect();
        topics.sort();
        for t in topics {
            let _ = tx.send(Publish {
                topic: t.clone(),
                payload: retained[t].clone(),
                retain: true,
            });
        }
        subs.push(Subscriber {
            filter: filter.to_string(),
            tx,
        });
        Ok(rx)
    }
}

#[async_trait]
pub trait BrokerConnector: Send + Sync {
    async fn connect(&self, uri: &str) -> Result<Arc<dyn Broker>, BrokerError>;
}

struct InProcessConnector;

#[async_trait]
impl BrokerConnector for InProcessConnector {
    async fn connect(&self, uri: &str) -> Result<Arc<dyn Broker>, BrokerError> {
        Ok(InProcessBroker::new(uri))
    }
}

/// Broker connections by URI, created on first use through the connector for the scheme.
pub struct BrokerRegistry {
    connectors: HashMap<String, Arc<dyn BrokerConnector>>,
    connected: tokio::sync::Mutex<HashMap<String, Arc<dyn Broker>>>,
}

impl BrokerRegistry {
    pub fn empty() -> Self {
        BrokerRegistry {
            connectors: HashMap::new(),
            connected: tokio::sync::Mutex::new(HashMap::new()),
        }
    }

    /// `inproc://` and `mqtt://` backends.
    pub fn standard() -> Self {
        let mut r = BrokerRegistry::empty();
        r.register("inproc", Arc::new(InProcessConnector));
        r.register("mqtt", Arc::new(crate::rumqtt::RumqttConnector));
        r
    }

    pub fn register(&mut self, scheme: &str, connector: Arc<dyn BrokerConnector>) {
        self.connectors.insert(scheme.to_string(), connector);
    }

    /// Uses `broker` for its URI instead of connecting.
    pub async fn insert(&self, broker: Arc<dyn Broker>) {
        self.connected.lock().await.insert(broker.uri().to_string(), broker);
    }

    pub async fn connect(&self, uri: &str) -> Result<Arc<dyn Broker>, BrokerError> {
        let mut connected = self.connected.lock().await;
        if let Some(b) = connected.get(uri) {
            return Ok(b.clone());
        }
        let scheme = uri.split_once("://").map(|(s, _)| s).unwrap_or("");
        let connector = self
            .connectors
            .get(scheme)
            .ok_or_else(|| BrokerError::UnsupportedScheme(uri.to_string()))?;
        let broker = connector.connect(uri).await?;
        connected.insert(uri.to_string(), broker.clone());
        Ok(broker)
    }
}
