//! Registry service, simulated fleet and CLI plumbing.

pub mod config;
pub mod registry;
pub mod sim;
pub mod views;

use std::sync::Arc;

use aurcap_net::{BrokerRegistry, HttpSkillServer, TransportRegistry};

pub use config::{FleetMode, RegistryConfig};
pub use registry::Registry;
pub use sim::{default_fleet, simulate_fleet, BehaviorRegistry, FleetHandle, Script, SimError, SimulatedRobot};

/// A registry with an optional simulated fleet, all in one process.
pub struct Node {
    pub registry: Arc<Registry>,
    pub brokers: Arc<BrokerRegistry>,
    pub fleet: Option<FleetHandle>,
}

#[derive(Debug, thiserror::Error)]
pub enum BootError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Broker(#[from] aurcap_net::BrokerError),
    #[error(transparent)]
    Bind(#[from] aurcap_net::BindError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl Node {
    /// Loads the models, builds the registry and boots the fleet the config asks for.
    pub async fn boot(config: &RegistryConfig, robots: &[SimulatedRobot], behaviors: &BehaviorRegistry) -> Result<Node, BootError> {
        let brokers = Arc::new(BrokerRegistry::standard());
        Self::boot_with(config, robots, behaviors, brokers.clone(), Arc::new(TransportRegistry::standard(brokers))).await
    }

    /// As [`Node::boot`] with caller-supplied broker connections and transports.
    pub async fn boot_with(
        config: &RegistryConfig,
        robots: &[SimulatedRobot],
        behaviors: &BehaviorRegistry,
        brokers: Arc<BrokerRegistry>,
        transports: Arc<TransportRegistry>,
    ) -> Result<Node, BootError> {
        let kb = config.boot_kb()?;
        let registry = Registry::new(kb, transports);
        let fleet = match config.fleet {
            FleetMode::None => None,
            FleetMode::Default => {
                let broker = brokers.connect(&config.broker_uri).await?;
                let http = HttpSkillServer::bind(config.fleet_listen).await?;
                Some(simulate_fleet(registry.kb(), robots, behaviors, broker, http).await?)
            }
        };
        Ok(Node { registry, brokers, fleet })
    }

    pub async fn shutdown(self) {
        if let Some(f) = self.fleet {
            f.shutdown(self.registry.kb()).await;
        }
    }
}
