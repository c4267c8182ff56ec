#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use aurcap_fleet::registry::serve;
use aurcap_fleet::{default_fleet, BehaviorRegistry, Node, RegistryConfig, SimulatedRobot};
use aurcap_net::{BrokerRegistry, InProcessBroker, TransportRegistry};
use serde_json::Value;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

pub struct Booted {
    pub node: Node,
    pub broker: Arc<InProcessBroker>,
    pub base: String,
}

pub async fn boot_fleet(robots: &[SimulatedRobot], transports: Option<TransportRegistry>) -> Booted {
    let config = RegistryConfig::default();
    let broker = InProcessBroker::new(config.broker_uri.clone());
    let brokers = Arc::new(BrokerRegistry::standard());
    brokers.insert(broker.clone()).await;
    let transports = Arc::new(transports.unwrap_or_else(|| TransportRegistry::standard(brokers.clone())));
    let node = Node::boot_with(&config, robots, &BehaviorRegistry::standard(), brokers, transports)
        .await
        .unwrap();
    let (addr, _) = serve(node.registry.clone(), ([127, 0, 0, 1], 0).into()).await.unwrap();
    Booted {
        node,
        broker,
        base: format!("http://{addr}"),
    }
}

pub async fn boot() -> Booted {
    boot_fleet(&default_fleet(), None).await
}

/// Polls a mission until its report leaves Running.
pub async fn await_report(client: &reqwest::Client, base: &str, id: &str, timeout: Duration) -> Value {
    let until = tokio::time::Instant::now() + timeout;
    loop {
        let v: Value = client.get(format!("{base}/missions/{id}")).send().await.unwrap().json().await.unwrap();
        if v["report"]["status"] != "Running" && !v["report"].is_null() {
            return v;
        }
        assert!(tokio::time::Instant::now() < until, "mission {id} still running: {v}");
        tokio::time::sleep(Duration::from_millis(25)).await;
    }
}
