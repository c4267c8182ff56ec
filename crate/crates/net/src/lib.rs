//! Skill interfaces over MQTT and HTTP, and the executor that drives plans through them.

pub mod bind;
pub mod broker;
pub mod executor;
pub mod rumqtt;
pub mod transport;
pub mod wire;

pub use bind::{bind_mqtt, BindError, HttpSkillServer, MqttBinding};
pub use broker::{Broker, BrokerError, BrokerRegistry, InProcessBroker};
pub use executor::{ExecuteError, ExecutionReport, ExecutionStatus, Executor, PreparedRun, Progress, StepStatus};
pub use transport::{invoke_remote, InvokeError, SkillTransport, TransportRegistry};
pub use wire::{CommandMessage, StateMessage};
