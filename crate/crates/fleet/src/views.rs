//! JSON shapes returned by the registry and printed by the CLI.

use aurcap_core::capability::capability;
use aurcap_core::interface::{descriptors_of, Endpoint, SkillInterfaceDescriptor};
use aurcap_core::matchmaker::Match;
use aurcap_core::planner::{Assignment, Plan};
use aurcap_core::runtime::realized_capability;
use aurcap_core::structure::modality_of;
use aurcap_core::vocab::cask;
use aurcap_core::{Iri, KnowledgeBase};
use aurcap_net::wire::WireParameter;
use aurcap_net::ExecutionReport;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct InterfaceView {
    pub id: Iri,
    pub kind: &'static str,
    pub live: bool,
    /// Command topic or skill URL.
    pub address: String,
}

impl From<&SkillInterfaceDescriptor> for InterfaceView {
    fn from(d: &SkillInterfaceDescriptor) -> Self {
        let address = match &d.endpoint {
            Endpoint::Mqtt(e) => format!("{} {}", e.broker_uri, e.command_topic),
            Endpoint::Http(e) => e.skill_url(),
            Endpoint::OpcUa(e) => format!("{} {}", e.endpoint_url, e.node_id),
        };
        InterfaceView {
            id: d.id.clone(),
            kind: d.kind().name(),
            live: d.is_live(),
            address,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AssignmentView {
    pub step: Iri,
    pub robot: Iri,
    pub capability: Iri,
    pub skill: Iri,
    pub interface: InterfaceView,
    pub depends_on: Vec<Iri>,
    pub parameters: Vec<WireParameter>,
}

impl From<&Assignment> for AssignmentView {
    fn from(a: &Assignment) -> Self {
        AssignmentView {
            step: a.step.clone(),
            robot: a.robot.clone(),
            capability: a.capability.clone(),
            skill: a.skill.clone(),
            interface: InterfaceView::from(&a.interface),
            depends_on: a.depends_on.iter().cloned().collect(),
            parameters: a.parameters.iter().map(WireParameter::from).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanView {
    pub mission: Iri,
    pub assignments: Vec<AssignmentView>,
}

impl From<&Plan> for PlanView {
    fn from(p: &Plan) -> Self {
        PlanView {
            mission: p.mission.clone(),
            assignments: p.assignments.iter().map(AssignmentView::from).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchView {
    pub rank: usize,
    pub robot: Iri,
    pub capability: Iri,
    pub skill: Iri,
    pub unused_assurances: usize,
    pub interfaces: Vec<InterfaceView>,
}

impl MatchView {
    pub fn ranked(matches: &[Match]) -> Vec<MatchView> {
        matches
            .iter()
            .enumerate()
            .map(|(i, m)| MatchView {
                rank: i + 1,
                robot: m.robot.clone(),
                capability: m.capability.clone(),
                skill: m.skill.clone(),
                unused_assurances: m.unused_assurances,
                interfaces: m.interfaces.iter().map(InterfaceView::from).collect(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CapabilityView {
    pub capability: Iri,
    pub capability_type: Option<Iri>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkillView {
    pub skill: Iri,
    pub capability: Option<Iri>,
    pub interfaces: Vec<InterfaceView>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RobotView {
    pub robot: Iri,
    pub modality: Option<&'static str>,
    pub capabilities: Vec<CapabilityView>,
    pub skills: Vec<SkillView>,
}

impl RobotView {
    pub fn describe(kb: &KnowledgeBase, robot: &Iri) -> Self {
        let capabilities = aurcap_core::capability::capabilities_provided_by(kb, robot)
            .into_iter()
            .map(|c| CapabilityView {
                capability_type: capability(kb, &c).ok().map(|d| d.capability_type),
                capability: c,
            })
            .collect();
        let mut skills: Vec<SkillView> = kb
            .subjects(&cask::HOSTED_BY, robot)
            .into_iter()
            .map(|s| SkillView {
                capability: realized_capability(kb, &s),
                interfaces: descriptors_of(kb, &s).unwrap_or_default().iter().map(InterfaceView::from).collect(),
                skill: s,
            })
            .collect();
        skills.sort_by(|a, b| a.skill.cmp(&b.skill));
        RobotView {
            robot: robot.clone(),
            modality: modality_of(kb, robot).map(|m| m.name()),
            capabilities,
            skills,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MissionView {
    pub id: String,
    pub mission: Iri,
    pub plan: PlanView,
    pub report: Option<ExecutionReport>,
    pub error: Option<String>,
}
