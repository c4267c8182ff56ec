//! Missions and required capabilities read from Turtle.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::capability::{IoKind, KindCounts};
use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::KnowledgeBase;
use crate::matchmaker::RequiredCapability;
use crate::property::{self, PropertyError, Role};
use crate::runtime::Parameter;
use crate::turtle;
use crate::vocab::aur_mission as m;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MissionError {
    #[error("no mission in document")]
    NoMission,
    #[error("document holds several missions; name one")]
    AmbiguousMission,
    #[error("no required capability in document")]
    NoRequiredCapability,
    #[error("{0} lacks a required capability type")]
    MissingCapabilityType(Iri),
    #[error("unknown io kind `{0}`")]
    UnknownKind(String),
    #[error("{0} is not a requirement")]
    NotARequirement(Iri),
    #[error("start parameter {0} is incomplete")]
    IncompleteParameter(Iri),
    #[error("step {step} depends on unknown step {missing}")]
    UnknownDependency { step: Iri, missing: Iri },
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissionStep {
    pub id: Iri,
    pub index: i64,
    pub required: RequiredCapability,
    pub depends_on: BTreeSet<Iri>,
    pub parameters: Vec<Parameter>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mission {
    pub id: Iri,
    pub steps: Vec<MissionStep>,
}

impl Mission {
    pub fn empty(id: Iri) -> Self {
        Mission { id, steps: Vec::new() }
    }

    pub fn step(&self, id: &Iri) -> Option<&MissionStep> {
        self.steps.iter().find(|s| &s.id == id)
    }
}

fn kinds(kb: &KnowledgeBase, subject: &Iri, property: &Iri) -> Result<KindCounts, MissionError> {
    let mut counts = KindCounts::new();
    for literal in kb.literals(subject, property) {
        for word in literal.lexical().split_whitespace() {
            let kind = IoKind::parse(word).ok_or_else(|| MissionError::UnknownKind(word.to_string()))?;
            *counts.entry(kind).or_default() += 1;
        }
    }
    Ok(counts)
}

/// Reads the required capability described at `subject`.
pub fn required_capability(kb: &KnowledgeBase, subject: &Iri) -> Result<RequiredCapability, MissionError> {
    let capability_type = kb
        .object(subject, &m::REQUIRES_CAPABILITY_TYPE)
        .ok_or_else(|| MissionError::MissingCapabilityType(subject.clone()))?;
    let mut requirements = Vec::new();
    for id in kb.objects(subject, &m::HAS_REQUIREMENT) {
        let inst = property::instance_description(kb, &id)?;
        if inst.role != Role::Requirement {
            return Err(MissionError::NotARequirement(id));
        }
        requirements.push(inst);
    }
    Ok(RequiredCapability {
        capability_type,
        required_inputs: kinds(kb, subject, &m::REQUIRED_INPUTS)?,
        required_outputs: kinds(kb, subject, &m::REQUIRED_OUTPUTS)?,
        requirements,
    })
}

fn step(kb: &KnowledgeBase, id: &Iri) -> Result<MissionStep, MissionError> {
    let index = kb
        .literal(id, &m::STEP_INDEX)
        .and_then(|l| l.lexical().parse().ok())
        .unwrap_or(i64::MAX);
    let mut parameters = Vec::new();
    for p in kb.objects(id, &m::HAS_START_PARAMETER) {
        let incomplete = || MissionError::IncompleteParameter(p.clone());
        let type_description = kb.object(&p, &m::PARAMETER_TYPE).ok_or_else(incomplete)?;
        let value = kb.literal(&p, &m::PARAMETER_VALUE).ok_or_else(incomplete)?;
        parameters.push(Parameter { type_description, value });
    }
    parameters.sort_by(|a, b| a.type_description.cmp(&b.type_description));
    Ok(MissionStep {
        id: id.clone(),
        index,
        required: required_capability(kb, id)?,
        depends_on: kb.objects(id, &m::DEPENDS_ON).into_iter().collect(),
        parameters,
    })
}

/// Reads mission `id` from `kb`. Steps are ordered by index, then IRI.
pub fn mission_from_kb(kb: &KnowledgeBase, id: &Iri) -> Result<Mission, MissionError> {
    let mut steps = kb
        .objects(id, &m::HAS_STEP)
        .iter()
        .map(|s| step(kb, s))
        .collect::<Result<Vec<_>, _>>()?;
    steps.sort_by(|a, b| (a.index, &a.id).cmp(&(b.index, &b.id)));
    let ids: BTreeSet<&Iri> = steps.iter().map(|s| &s.id).collect();
    for s in &steps {
        if let Some(missing) = s.depends_on.iter().find(|d| !ids.contains(d)) {
            return Err(MissionError::UnknownDependency {
                step: s.id.clone(),
                missing: missing.clone(),
            });
        }
    }
    Ok(Mission { id: id.clone(), steps })
}

/// Parses the single mission in a Turtle document.
pub fn parse_mission(text: &str) -> Result<Mission, MissionError> {
    let kb = turtle::parse_turtle(text)?;
    let missions = kb.subjects(&crate::vocab::rdf::TYPE, &m::MISSION);
    match missions.as_slice() {
        [] => Err(MissionError::NoMission),
        [one] => mission_from_kb(&kb, one),
        _ => Err(MissionError::AmbiguousMission),
    }
}

/// Parses the first required capability (by IRI) in a Turtle document.
pub fn parse_required_capability(text: &str) -> Result<RequiredCapability, MissionError> {
    let kb = turtle::parse_turtle(text)?;
    let subject = kb
        .subjects(&crate::vocab::rdf::TYPE, &m::REQUIRED_CAPABILITY)
        .into_iter()
        .min()
        .ok_or(MissionError::NoRequiredCapability)?;
    required_capability(&kb, &subject)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::literal::{Datatype, Literal};
    use crate::property::Expression;
    use crate::vocab::{aur_cap, aur_prop};

    const MISSION: &str = r#"
@prefix aur-mission: <https://w3id.org/aur/mission#> .
@prefix aur-cap: <https://w3id.org/aur/cap#> .
@prefix aur-prop: <https://w3id.org/aur/prop#> .
@prefix iec: <https://w3id.org/aur/iec61360#> .
@prefix ex: <https://example.org/m#> .

ex:m a aur-mission:Mission ; aur-mission:hasStep ex:b, ex:a .
ex:a a aur-mission:Step ; aur-mission:stepIndex 1 ;
    aur-mission:requiresCapabilityType aur-cap:Navigate ;
    aur-mission:requiredInputs "Information" ;
    aur-mission:requiredOutputs "Information" .
ex:b a aur-mission:Step ; aur-mission:stepIndex 2 ;
    aur-mission:dependsOn ex:a ;
    aur-mission:requiresCapabilityType aur-cap:Fly ;
    aur-mission:requiredInputs "Product Information" ;
    aur-mission:hasRequirement ex:b-alt ;
    aur-mission:hasStartParameter ex:b-p .
ex:b-alt a iec:InstanceDescription ; aur-mission:constrains aur-prop:maxAltitude ;
    iec:role "Requirement" ; iec:expression "Equals" ; iec:value 80.0 .
ex:b-p a aur-mission:StartParameter ; aur-mission:parameterType aur-prop:targetAltitude ;
    aur-mission:parameterValue 80.0 .
"#;

    #[test]
    fn reads_steps_in_index_order() {
        let mission = parse_mission(MISSION).unwrap();
        assert_eq!(mission.steps.len(), 2);
        let (a, b) = (&mission.steps[0], &mission.steps[1]);
        assert_eq!(a.required.capability_type, *aur_cap::NAVIGATE);
        assert_eq!(b.depends_on.len(), 1);
        assert_eq!(b.required.required_inputs.values().sum::<usize>(), 2);
        let req = &b.required.requirements[0];
        assert_eq!(req.type_description, *aur_prop::MAX_ALTITUDE);
        assert_eq!(req.expression, Expression::Equals(Literal::new("80.0", Datatype::Decimal).unwrap()));
        assert_eq!(b.parameters[0].type_description, *aur_prop::TARGET_ALTITUDE);
    }

    #[test]
    fn dangling_dependency() {
        let text = MISSION.replace("aur-mission:dependsOn ex:a", "aur-mission:dependsOn ex:zz");
        assert!(matches!(parse_mission(&text), Err(MissionError::UnknownDependency { .. })));
    }

    #[test]
    fn no_mission() {
        assert_eq!(parse_mission(""), Err(MissionError::NoMission));
    }
}
