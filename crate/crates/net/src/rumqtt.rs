//! Broker backend talking MQTT 3.1.1 to a network broker.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use parking_lot::Mutex;
use rumqttc::{AsyncClient, Event, MqttOptions, Packet, QoS};
use tokio::sync::mpsc;
use tokio::task::JoinHandle;
use tracing::warn;

use crate::broker::{topic_matches, validate_filter, validate_topic, Broker, BrokerConnector, BrokerError, Publish};

type Routes = Arc<Mutex<Vec<(String, mpsc::UnboundedSender<Publish>)>>>;

pub struct RumqttBroker {
    uri: String,
    client: AsyncClient,
    routes: Routes,
    event_loop: JoinHandle<()>,
}

impl Drop for RumqttBroker {
    fn drop(&mut self) {
        self.event_loop.abort();
    }
}

/// Splits `mqtt://host[:port]`.
pub fn parse_uri(uri: &str) -> Result<(String, u16), BrokerError> {
    let rest = uri
        .strip_prefix("mqtt://")
        .ok_or_else(|| BrokerError::UnsupportedScheme(uri.to_string()))?
        .trim_end_matches('/');
    let (host, port) = match rest.rsplit_once(':') {
        Some((h, p)) => (h, p.parse().map_err(|_| BrokerError::Unreachable(format!("bad port in {uri}")))?),
        None => (rest, 1883),
    };
    if host.is_empty() {
        return Err(BrokerError::Unreachable(format!("no host in {uri}")));
    }
    Ok((host.to_string(), port))
}

impl RumqttBroker {
    pub fn connect(uri: &str) -> Result<Self, BrokerError> {
        let (host, port) = parse_uri(uri)?;
        let mut options = MqttOptions::new(format!("aurcap-{}", uuid::Uuid::new_v4().simple()), host, port);
        options.set_keep_alive(Duration::from_secs(5));
        options.set_max_packet_size(1 << 20, 1 << 20);
        let (client, mut event_loop) = AsyncClient::new(options, 1024);
        let routes: Routes = Arc::new(Mutex::new(Vec::new()));
        let table = routes.clone();
        let uri_owned = uri.to_string();
        let event_loop = tokio::spawn(async move {
            loop {
                match event_loop.poll().await {
                    Ok(Event::Incoming(Packet::Publish(p))) => {
                        let msg = Publish {
                            topic: p.topic.clone(),
                            payload: p.payload.to_vec(),
                            retain: p.retain,
                        };
                        let mut routes = table.lock();
                        routes.retain(|(_, tx)| !tx.is_closed());
                        for (filter, tx) in routes.iter() {
                            if topic_matches(filter, &msg.topic) {
                                let _ = tx.send(msg.clone());
                            }
                        }
                    }
                    Ok(_) => {}
                    Err(e) => {
                        warn!(broker = %uri_owned, error = %e, "mqtt connection error; retrying");
                        tokio::time::sleep(Duration::from_millis(500)).await;
                    }
                }
            }
        });
        Ok(RumqttBroker {
            uri: uri.to_string(),
            client,
            routes,
            event_loop,
        })
    }
}

#[async_trait]
impl Broker for RumqttBroker {
    fn uri(&self) -> &str {
        &self.uri
    }

    async fn publish(&self, topic: &str, payload: Vec<u8>, retain: bool) -> Result<(), BrokerError> {
        validate_topic(topic)?;
        self.client
            .publish(topic, QoS::AtLeastOnce, retain, payload)
            .await
            .map_err(|e| BrokerError::Unreachable(e.to_string()))
    }

    async fn subscribe(&self, filter: &str) -> Result<mpsc::UnboundedReceiver<Publish>, BrokerError> {
        validate_filter(filter)?;
        let (tx, rx) = mpsc::unbounded_channel();
        self.routes.lock().push((filter.to_string(), tx));
        self.client
            .subscribe(filter, QoS::AtLeastOnce)
            .await
            .map_err(|e| BrokerError::Unreachable(e.to_string()))?;
        Ok(rx)
    }
}

pub struct RumqttConnector;

#[async_trait]
impl BrokerConnector for RumqttConnector {
    async fn connect(&self, uri: &str) -> Result<Arc<dyn Broker>, BrokerError> {
        Ok(Arc::new(RumqttBroker::connect(uri)?))
    }
}
