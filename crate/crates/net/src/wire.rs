//! JSON messages exchanged with skills over MQTT and HTTP.

use aurcap_core::runtime::{Command, Parameter, StateEvent};
use aurcap_core::skill::{SkillState, TransitionCommand};
use aurcap_core::{Datatype, Iri, Literal};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WireError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unknown datatype `{0}`")]
    UnknownDatatype(String),
    #[error("invalid parameter value: {0}")]
    InvalidValue(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct WireParameter {
    pub type_description: Iri,
    pub value: String,
    pub datatype: String,
}

impl From<&Parameter> for WireParameter {
    fn from(p: &Parameter) -> Self {
        WireParameter {
            type_description: p.type_description.clone(),
            value: p.value.lexical().to_string(),
            datatype: p.value.datatype().tag().to_string(),
        }
    }
}

impl WireParameter {
    pub fn to_parameter(&self) -> Result<Parameter, WireError> {
        let datatype = Datatype::from_tag(&self.datatype).ok_or_else(|| WireError::UnknownDatatype(self.datatype.clone()))?;
        let value = Literal::new(&self.value, datatype).map_err(|e| WireError::InvalidValue(e.to_string()))?;
        Ok(Parameter::new(self.type_description.clone(), value))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CommandMessage {
    pub correlation_id: Uuid,
    pub command: TransitionCommand,
    #[serde(default)]
    pub parameters: Vec<WireParameter>,
    pub issued_at: DateTime<Utc>,
}

impl CommandMessage {
    /// Fresh message with a new correlation id.
    pub fn new(command: TransitionCommand) -> Self {
        CommandMessage {
            correlation_id: Uuid::new_v4(),
            command,
            parameters: Vec::new(),
            issued_at: Utc::now(),
        }
    }

    pub fn with_parameters(mut self, parameters: &[Parameter]) -> Self {
        self.parameters = parameters.iter().map(WireParameter::from).collect();
        self
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, WireError> {
        serde_json::from_slice(bytes).map_err(|e| WireError::Malformed(e.to_string()))
    }

    pub fn to_command(&self) -> Result<Command, WireError> {
        let parameters = self.parameters.iter().map(WireParameter::to_parameter).collect::<Result<_, _>>()?;
        Ok(Command::new(self.command)
            .with_parameters(parameters)
            .correlated(self.correlation_id.to_string()))
    }

    pub fn canonical(&self) -> String {
        canonical(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct StateMessage {
    pub skill: Iri,
    pub state: SkillState,
    pub correlation_id: Option<String>,
    pub sequence: u64,
    pub at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&StateEvent> for StateMessage {
    fn from(e: &StateEvent) -> Self {
        StateMessage {
            skill: e.skill.clone(),
            state: e.state,
            correlation_id: e.correlation_id.clone(),
            sequence: e.sequence,
            at: e.at,
            detail: e.detail.clone(),
        }
    }
}

impl StateMessage {
    pub fn parse(bytes: &[u8]) -> Result<Self, WireError> {
        serde_json::from_slice(bytes).map_err(|e| WireError::Malformed(e.to_string()))
    }

    pub fn canonical(&self) -> String {
        canonical(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct Rejection {
    pub correlation_id: Option<String>,
    pub reason: String,
}

impl Rejection {
    /// Rejection for a payload that did not parse; keeps its correlation id if one is readable.
    pub fn for_payload(payload: &[u8], reason: String) -> Self {
        let correlation_id = serde_json::from_slice::<serde_json::Value>(payload)
            .ok()
            .and_then(|v| v.get("correlationId")?.as_str().map(str::to_string));
        Rejection { correlation_id, reason }
    }

    pub fn canonical(&self) -> String {
        canonical(self)
    }
}

fn canonical<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("wire types always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const START: &str = r#"{"correlationId":"6f1c2a4e-8b1d-4c55-9a3e-2f0d7c1b9e10","command":"start","parameters":[{"typeDescription":"https://w3id.org/aur/prop#targetAltitude","value":"80.0","datatype":"decimal"}],"issuedAt":"2025-03-01T10:00:00Z"}"#;

    #[test]
    fn command_roundtrips_byte_identically() {
        let msg = CommandMessage::parse(START.as_bytes()).unwrap();
        assert_eq!(msg.canonical(), START);
        let cmd = msg.to_command().unwrap();
        assert_eq!(cmd.kind, TransitionCommand::Start);
        assert_eq!(cmd.parameters[0].value.as_f64(), Some(80.0));
    }

    #[test]
    fn strict_parsing() {
        let extra = START.replace(r#""command""#, r#""extra":1,"command""#);
        assert!(CommandMessage::parse(extra.as_bytes()).is_err());
        let upper = START.replace(r#""start""#, r#""Start""#);
        assert!(CommandMessage::parse(upper.as_bytes()).is_err());
        let bad_id = START.replace("6f1c2a4e", "zz");
        assert!(CommandMessage::parse(bad_id.as_bytes()).is_err());
        let bad_type = START.replace(r#""decimal""#, r#""float""#);
        let msg = CommandMessage::parse(bad_type.as_bytes()).unwrap();
        assert_eq!(msg.to_command(), Err(WireError::UnknownDatatype("float".into())));
    }

    #[test]
    fn rejection_recovers_correlation_id() {
        let r = Rejection::for_payload(br#"{"correlationId":"abc","command":"jump"}"#, "bad".into());
        assert_eq!(r.correlation_id.as_deref(), Some("abc"));
        assert_eq!(Rejection::for_payload(b"{", "bad".into()).correlation_id, None);
    }

    #[test]
    fn state_message_shape() {
        let text = r#"{"skill":"https://example.org/s#fly","state":"Execute","correlationId":null,"sequence":3,"at":"2025-03-01T10:00:00.250Z"}"#;
        let msg = StateMessage::parse(text.as_bytes()).unwrap();
        assert_eq!(msg.state, SkillState::Execute);
        assert_eq!(msg.canonical(), text);
    }
}
