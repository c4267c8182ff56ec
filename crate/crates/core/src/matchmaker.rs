//! Resolves required capabilities to (robot, capability, skill) triples.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::capability::{self, CapabilityError, KindCounts};
use crate::error::KbError;
use crate::interface::{self, SkillInterfaceDescriptor};
use crate::iri::Iri;
use crate::kb::KnowledgeBase;
use crate::property::{self, InstanceDescription, PropertyError, Role};
use crate::runtime;
use crate::vocab::{cask, vdi3682};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatchError {
    #[error("{0} is not a capability type")]
    UnknownCapabilityType(Iri),
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RequiredCapability {
    pub capability_type: Iri,
    pub required_inputs: KindCounts,
    pub required_outputs: KindCounts,
    pub requirements: Vec<InstanceDescription>,
}

impl RequiredCapability {
    pub fn new(capability_type: Iri) -> Self {
        RequiredCapability {
            capability_type,
            required_inputs: KindCounts::new(),
            required_outputs: KindCounts::new(),
            requirements: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub robot: Iri,
    pub capability: Iri,
    pub skill: Iri,
    /// Assurances on the capability or robot that no requirement used.
    pub unused_assurances: usize,
    /// Live interfaces of the skill, preferred first.
    pub interfaces: Vec<SkillInterfaceDescriptor>,
}

impl Match {
    fn rank_key(&self) -> (usize, &Iri, &Iri, &Iri) {
        (self.unused_assurances, &self.robot, &self.capability, &self.skill)
    }
}

/// Multiset inclusion.
pub fn kinds_within(small: &KindCounts, large: &KindCounts) -> bool {
    small
        .iter()
        .all(|(k, n)| large.get(k).copied().unwrap_or(0) >= *n)
}

/// Offers (assurances and actuals) relevant to a capability provided by a robot.
pub fn offers(kb: &KnowledgeBase, robot: &Iri, capability: &Iri) -> Result<Vec<InstanceDescription>, MatchError> {
    let mut out = property::capability_offers(kb, capability)?;
    out.extend(property::instances_of_owner(kb, robot, None)?);
    out.retain(|o| o.role != Role::Requirement);
    Ok(out)
}

/// Requirement coverage: `None` if some requirement is unmet, otherwise the
/// number of assurances that satisfied no requirement.
pub fn coverage(requirements: &[InstanceDescription], offers: &[InstanceDescription]) -> Result<Option<usize>, MatchError> {
    let mut used = vec![false; offers.len()];
    for req in requirements {
        let mut met = false;
        for (i, offer) in offers.iter().enumerate() {
            if offer.type_description == req.type_description && property::satisfies(req, offer)? {
                used[i] = true;
                met = true;
            }
        }
        if !met {
            return Ok(None);
        }
    }
    Ok(Some(
        offers
            .iter()
            .zip(&used)
            .filter(|(o, used)| o.role == Role::Assurance && !**used)
            .count(),
    ))
}

/// Ranked matches: fewer unused assurances first, then robot, capability and skill IRI.
pub fn match_capability(kb: &KnowledgeBase, req: &RequiredCapability) -> Result<Vec<Match>, MatchError> {
    if !kb.contains_term(&req.capability_type)
        || !kb.is_subclass_of(&req.capability_type, &vdi3682::PROCESS_OPERATOR)?
    {
        return Err(MatchError::UnknownCapabilityType(req.capability_type.clone()));
    }
    let mut out = Vec::new();
    for cap in kb.instances_of(&req.capability_type)? {
        let desc = capability::capability(kb, &cap)?;
        let signature_ok = kinds_within(&capability::kind_counts(&desc.inputs), &req.required_inputs)
            && kinds_within(&req.required_outputs, &capability::kind_counts(&desc.outputs));
        if !signature_ok {
            continue;
        }
        for robot in capability::providers_of(kb, &cap) {
            let Some(unused) = coverage(&req.requirements, &offers(kb, &robot, &cap)?)? else {
                continue;
            };
            for skill in runtime::skills_realizing(kb, &cap) {
                if kb.object(&skill, &cask::HOSTED_BY).as_ref() != Some(&robot) {
                    continue;
                }
                let interfaces = interface::live_descriptors(kb, &skill);
                if interfaces.is_empty() {
                    continue;
                }
                out.push(Match {
                    robot: robot.clone(),
                    capability: cap.clone(),
                    skill,
                    unused_assurances: unused,
                    interfaces,
                });
            }
        }
    }
    out.sort_by(|a, b| a.rank_key().cmp(&b.rank_key()));
    Ok(out)
}

/// Robots appearing in any match, for registry queries.
pub fn matching_robots(matches: &[Match]) -> BTreeSet<Iri> {
    matches.iter().map(|m| m.robot.clone()).collect()
}
