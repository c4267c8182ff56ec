//! Skill interface descriptors and their knowledge-base form.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::{Assertion, KnowledgeBase};
use crate::literal::Literal;
use crate::turtle;
use crate::vocab::{cask, mqtt, opcua, wadl};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterfaceError {
    #[error("cannot encode `{0}` as a topic segment")]
    TopicEncoding(String),
    #[error("descriptor {0} is incomplete")]
    Incomplete(Iri),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InterfaceKind {
    Mqtt,
    Http,
    OpcUa,
}

impl InterfaceKind {
    pub fn class(self) -> Iri {
        match self {
            InterfaceKind::Mqtt => cask::MQTT_SKILL_INTERFACE.clone(),
            InterfaceKind::Http => cask::HTTP_SKILL_INTERFACE.clone(),
            InterfaceKind::OpcUa => cask::OPCUA_SKILL_INTERFACE.clone(),
        }
    }

    /// Registry key of the transport serving this kind.
    pub fn name(self) -> &'static str {
        match self {
            InterfaceKind::Mqtt => "mqtt",
            InterfaceKind::Http => "http",
            InterfaceKind::OpcUa => "opcua",
        }
    }

    /// OPC UA is described but never bound.
    pub fn is_live(self) -> bool {
        !matches!(self, InterfaceKind::OpcUa)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MqttEndpoint {
    pub broker_uri: String,
    pub command_topic: String,
    pub state_topic: String,
    pub qos: u8,
}

impl MqttEndpoint {
    /// Standard topics for a skill hosted by `robot`.
    pub fn for_skill(broker_uri: &str, robot: &Iri, skill: &Iri) -> Result<Self, InterfaceError> {
        let r = encode_segment(robot.local_name())?;
        let s = encode_segment(skill.local_name())?;
        Ok(MqttEndpoint {
            broker_uri: broker_uri.to_string(),
            command_topic: format!("aur/robots/{r}/skills/{s}/cmd"),
            state_topic: format!("aur/robots/{r}/skills/{s}/state"),
            qos: 1,
        })
    }

    pub fn rejected_topic(&self) -> String {
        format!("{}/rejected", self.command_topic)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HttpEndpoint {
    pub base_url: String,
    /// Path of the skill resource below the base, e.g. `/skills/fly-skill`.
    pub resource_path: String,
}

impl HttpEndpoint {
    pub fn for_skill(base_url: &str, skill: &Iri) -> Result<Self, InterfaceError> {
        Ok(HttpEndpoint {
            base_url: base_url.trim_end_matches('/').to_string(),
            resource_path: format!("/skills/{}", encode_segment(skill.local_name())?),
        })
    }

    pub fn skill_url(&self) -> String {
        format!("{}{}", self.base_url, self.resource_path)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OpcUaEndpoint {
    pub endpoint_url: String,
    pub node_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Mqtt(MqttEndpoint),
    Http(HttpEndpoint),
    OpcUa(OpcUaEndpoint),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SkillInterfaceDescriptor {
    pub id: Iri,
    pub skill: Iri,
    pub endpoint: Endpoint,
}

impl SkillInterfaceDescriptor {
    pub fn kind(&self) -> InterfaceKind {
        match self.endpoint {
            Endpoint::Mqtt(_) => InterfaceKind::Mqtt,
            Endpoint::Http(_) => InterfaceKind::Http,
            Endpoint::OpcUa(_) => InterfaceKind::OpcUa,
        }
    }

    pub fn is_live(&self) -> bool {
        self.kind().is_live()
    }

    /// Conventional descriptor id for `skill` and `kind`.
    pub fn default_id(skill: &Iri, kind: InterfaceKind) -> Result<Iri, KbError> {
        skill.child(&format!("-{}", kind.name()))
    }
}

/// Percent-encodes a local name for use as one topic or path segment.
///
/// `%`, `+`, `#` and `/` are escaped; empty names and names with whitespace
/// or control characters are refused.
pub fn encode_segment(local: &str) -> Result<String, InterfaceError> {
    if local.is_empty() || local.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return Err(InterfaceError::TopicEncoding(local.to_string()));
    }
    let mut out = String::with_capacity(local.len());
    for c in local.chars() {
        match c {
            '%' => out.push_str("%25"),
            '+' => out.push_str("%2B"),
            '#' => out.push_str("%23"),
            '/' => out.push_str("%2F"),
            c => out.push(c),
        }
    }
    Ok(out)
}

/// Records a descriptor and its `accessibleThrough` link.
pub fn record_descriptor(kb: &mut KnowledgeBase, d: &SkillInterfaceDescriptor) {
    kb.assert(Assertion::typed(&d.id, &d.kind().class()));
    kb.assert(Assertion::link(&d.skill, &cask::ACCESSIBLE_THROUGH, &d.id));
    match &d.endpoint {
        Endpoint::Mqtt(m) => {
            kb.set_literal(&d.id, &mqtt::BROKER_URI, Literal::string(m.broker_uri.clone()));
            kb.set_literal(&d.id, &mqtt::COMMAND_TOPIC, Literal::string(m.command_topic.clone()));
            kb.set_literal(&d.id, &mqtt::STATE_TOPIC, Literal::string(m.state_topic.clone()));
            kb.set_literal(&d.id, &mqtt::QOS, Literal::integer(m.qos.into()));
        }
        Endpoint::Http(h) => {
            kb.set_literal(&d.id, &wadl::BASE_URL, Literal::string(h.base_url.clone()));
            kb.set_literal(&d.id, &wadl::RESOURCE_PATH, Literal::string(h.resource_path.clone()));
        }
        Endpoint::OpcUa(o) => {
            kb.set_literal(&d.id, &opcua::ENDPOINT_URL, Literal::string(o.endpoint_url.clone()));
            kb.set_literal(&d.id, &opcua::NODE_ID, Literal::string(o.node_id.clone()));
        }
    }
}

/// Removes a descriptor and its link.
pub fn remove_descriptor(kb: &mut KnowledgeBase, d: &SkillInterfaceDescriptor) {
    kb.retract(&Assertion::link(&d.skill, &cask::ACCESSIBLE_THROUGH, &d.id));
    let facts: Vec<Assertion> = kb.about(&d.id).collect();
    for fact in facts {
        kb.retract(&fact);
    }
}

fn read_descriptor(kb: &KnowledgeBase, skill: &Iri, id: &Iri) -> Result<SkillInterfaceDescriptor, InterfaceError> {
    let text = |p: &Iri| {
        kb.literal(id, p)
            .map(|l| l.lexical().to_string())
            .ok_or_else(|| InterfaceError::Incomplete(id.clone()))
    };
    let endpoint = if kb.is_instance_of(id, &cask::MQTT_SKILL_INTERFACE) {
        Endpoint::Mqtt(MqttEndpoint {
            broker_uri: text(&mqtt::BROKER_URI)?,
            command_topic: text(&mqtt::COMMAND_TOPIC)?,
            state_topic: text(&mqtt::STATE_TOPIC)?,
            qos: text(&mqtt::QOS)?
                .parse()
                .map_err(|_| InterfaceError::Incomplete(id.clone()))?,
        })
    } else if kb.is_instance_of(id, &cask::HTTP_SKILL_INTERFACE) {
        Endpoint::Http(HttpEndpoint {
            base_url: text(&wadl::BASE_URL)?,
            resource_path: text(&wadl::RESOURCE_PATH)?,
        })
    } else if kb.is_instance_of(id, &cask::OPCUA_SKILL_INTERFACE) {
        Endpoint::OpcUa(OpcUaEndpoint {
            endpoint_url: text(&opcua::ENDPOINT_URL)?,
            node_id: text(&opcua::NODE_ID)?,
        })
    } else {
        return Err(InterfaceError::Incomplete(id.clone()));
    };
    Ok(SkillInterfaceDescriptor {
        id: id.clone(),
        skill: skill.clone(),
        endpoint,
    })
}

/// Descriptors of `skill` recorded in `kb`, ordered by id.
pub fn descriptors_of(kb: &KnowledgeBase, skill: &Iri) -> Result<Vec<SkillInterfaceDescriptor>, InterfaceError> {
    kb.objects(skill, &cask::ACCESSIBLE_THROUGH)
        .iter()
        .map(|id| read_descriptor(kb, skill, id))
        .collect()
}

/// Live descriptors of `skill`, MQTT before HTTP, then by id. Incomplete
/// descriptors are skipped.
pub fn live_descriptors(kb: &KnowledgeBase, skill: &Iri) -> Vec<SkillInterfaceDescriptor> {
    let mut out: Vec<_> = kb
        .objects(skill, &cask::ACCESSIBLE_THROUGH)
        .iter()
        .filter_map(|id| read_descriptor(kb, skill, id).ok())
        .filter(|d| d.is_live())
        .collect();
    out.sort_by(|a, b| (a.kind(), &a.id).cmp(&(b.kind(), &b.id)));
    out
}

/// Turtle fragment describing every interface of `skill`.
pub fn describe_interfaces(kb: &KnowledgeBase, skill: &Iri) -> Result<String, InterfaceError> {
    let mut fragment = KnowledgeBase::with_model_prefixes();
    for d in descriptors_of(kb, skill)? {
        record_descriptor(&mut fragment, &d);
    }
    Ok(turtle::serialize_turtle(&fragment))
}

/// Every descriptor in a fragment, grouped by skill.
pub fn parse_descriptors(text: &str) -> Result<BTreeMap<Iri, Vec<SkillInterfaceDescriptor>>, InterfaceError> {
    let kb = turtle::parse_turtle(text)?;
    let mut out: BTreeMap<Iri, Vec<SkillInterfaceDescriptor>> = BTreeMap::new();
    for (skill, id) in kb.links(&cask::ACCESSIBLE_THROUGH) {
        let d = read_descriptor(&kb, &skill, &id)?;
        out.entry(skill).or_default().push(d);
    }
    Ok(out)
}
