//! Capability aspect: process operators with typed inputs and outputs,
//! ordered decomposition and provider links.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::{Assertion, KnowledgeBase};
use crate::literal::Literal;
use crate::vocab::{aur_cap, cask, iec, rdf, vdi3682};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapabilityError {
    #[error("{0} is not a capability type")]
    UnknownCapabilityType(Iri),
    #[error("unknown capability {0}")]
    UnknownCapability(Iri),
    #[error("decomposition of {0} would contain itself")]
    CyclicDecomposition(Iri),
    #[error("signature of {capability} does not match its sub-operators: {detail}")]
    SignatureMismatch { capability: Iri, detail: String },
    #[error("{0} is not a technical resource")]
    NotATechnicalResource(Iri),
    #[error("{0} is not an instance description")]
    UnknownInstanceDescription(Iri),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IoKind {
    Product,
    Information,
    Energy,
}

impl IoKind {
    pub const ALL: [IoKind; 3] = [IoKind::Product, IoKind::Information, IoKind::Energy];

    pub fn class(self) -> Iri {
        match self {
            IoKind::Product => vdi3682::PRODUCT.clone(),
            IoKind::Information => vdi3682::INFORMATION.clone(),
            IoKind::Energy => vdi3682::ENERGY.clone(),
        }
    }

    pub fn from_class(iri: &Iri) -> Option<Self> {
        IoKind::ALL.into_iter().find(|k| &k.class() == iri)
    }

    pub fn name(self) -> &'static str {
        match self {
            IoKind::Product => "Product",
            IoKind::Information => "Information",
            IoKind::Energy => "Energy",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        IoKind::ALL.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IoRole {
    pub kind: IoKind,
    pub state_label: String,
}

impl IoRole {
    pub fn new(kind: IoKind, state_label: impl Into<String>) -> Self {
        IoRole {
            kind,
            state_label: state_label.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CapabilityDescription {
    pub id: Iri,
    pub capability_type: Iri,
    pub inputs: Vec<IoRole>,
    pub outputs: Vec<IoRole>,
    pub sub_operators: Vec<Iri>,
    pub property_constraints: BTreeSet<Iri>,
}

impl CapabilityDescription {
    pub fn new(id: Iri, capability_type: Iri) -> Self {
        CapabilityDescription {
            id,
            capability_type,
            inputs: Vec::new(),
            outputs: Vec::new(),
            sub_operators: Vec::new(),
            property_constraints: BTreeSet::new(),
        }
    }

    pub fn input(mut self, kind: IoKind, label: &str) -> Self {
        self.inputs.push(IoRole::new(kind, label));
        self
    }

    pub fn output(mut self, kind: IoKind, label: &str) -> Self {
        self.outputs.push(IoRole::new(kind, label));
        self
    }

    pub fn sub_operators(mut self, subs: impl IntoIterator<Item = Iri>) -> Self {
        self.sub_operators.extend(subs);
        self
    }
}

/// Kind multiset.
pub type KindCounts = BTreeMap<IoKind, usize>;

pub fn kind_counts(roles: &[IoRole]) -> KindCounts {
    let mut counts = KindCounts::new();
    for role in roles {
        *counts.entry(role.kind).or_default() += 1;
    }
    counts
}

/// External inputs and outputs of a sequence of operators.
///
/// Each operator's inputs are first served from outputs left over by its
/// predecessors; whatever cannot be served is an external input. Outputs
/// never consumed are external outputs.
pub fn chain_signature<'a>(
    operators: impl IntoIterator<Item = (&'a [IoRole], &'a [IoRole])>,
) -> (KindCounts, KindCounts) {
    let mut external_in = KindCounts::new();
    let mut pool = KindCounts::new();
    for (inputs, outputs) in operators {
        for role in inputs {
            match pool.get_mut(&role.kind) {
                Some(n) if *n > 0 => *n -= 1,
                _ => *external_in.entry(role.kind).or_default() += 1,
            }
        }
        for role in outputs {
            *pool.entry(role.kind).or_default() += 1;
        }
    }
    pool.retain(|_, n| *n > 0);
    (external_in, pool)
}

fn require_capability_type(kb: &KnowledgeBase, t: &Iri) -> Result<(), CapabilityError> {
    if kb.contains_term(t) && kb.is_subclass_of(t, &vdi3682::PROCESS_OPERATOR)? {
        Ok(())
    } else {
        Err(CapabilityError::UnknownCapabilityType(t.clone()))
    }
}

pub fn is_capability(kb: &KnowledgeBase, id: &Iri) -> bool {
    kb.is_instance_of(id, &vdi3682::PROCESS_OPERATOR)
}

fn require_capability(kb: &KnowledgeBase, id: &Iri) -> Result<(), CapabilityError> {
    if is_capability(kb, id) {
        Ok(())
    } else {
        Err(CapabilityError::UnknownCapability(id.clone()))
    }
}

fn slot_index(kb: &KnowledgeBase, slot: &Iri) -> i64 {
    kb.literal(slot, &aur_cap::INDEX)
        .and_then(|l| l.lexical().parse().ok())
        .unwrap_or(i64::MAX)
}

fn ordered_slots(kb: &KnowledgeBase, owner: &Iri, property: &Iri) -> Vec<Iri> {
    let mut slots = kb.objects(owner, property);
    slots.sort_by_key(|s| (slot_index(kb, s), s.clone()));
    slots
}

fn read_roles(kb: &KnowledgeBase, cap: &Iri, property: &Iri) -> Vec<IoRole> {
    ordered_slots(kb, cap, property)
        .into_iter()
        .filter_map(|slot| {
            let kind = kb
                .asserted_types(&slot)
                .iter()
                .find_map(IoKind::from_class)?;
            let state_label = kb
                .literal(&slot, &aur_cap::STATE_LABEL)
                .map(|l| l.lexical().to_string())
                .unwrap_or_default();
            Some(IoRole { kind, state_label })
        })
        .collect()
}

/// Direct sub-operators in definition order.
pub fn sub_operators_of(kb: &KnowledgeBase, cap: &Iri) -> Vec<Iri> {
    ordered_slots(kb, cap, &aur_cap::HAS_SLOT)
        .into_iter()
        .filter_map(|slot| kb.object(&slot, &aur_cap::SLOT_OPERATOR))
        .collect()
}

fn reaches(kb: &KnowledgeBase, from: &Iri, target: &Iri) -> bool {
    let mut stack = vec![from.clone()];
    let mut seen = BTreeSet::new();
    while let Some(node) = stack.pop() {
        if &node == target {
            return true;
        }
        if seen.insert(node.clone()) {
            stack.extend(sub_operators_of(kb, &node));
        }
    }
    false
}

fn clear_capability(kb: &mut KnowledgeBase, cap: &Iri) {
    let slots: Vec<Iri> = [&*vdi3682::HAS_INPUT, &*vdi3682::HAS_OUTPUT, &*aur_cap::HAS_SLOT]
        .into_iter()
        .flat_map(|p| kb.objects(cap, p))
        .collect();
    for slot in slots {
        let facts: Vec<Assertion> = kb.about(&slot).collect();
        for fact in facts {
            kb.retract(&fact);
        }
    }
    kb.retract_all(cap, &rdf::TYPE);
    for property in [
        &*vdi3682::HAS_INPUT,
        &*vdi3682::HAS_OUTPUT,
        &*vdi3682::HAS_SUB_OPERATOR,
        &*aur_cap::HAS_SLOT,
        &*aur_cap::CONSTRAINED_BY,
    ] {
        kb.retract_all(cap, property);
    }
}

/// Defines (or redefines) a capability.
pub fn define_capability(kb: &mut KnowledgeBase, desc: &CapabilityDescription) -> Result<Iri, CapabilityError> {
    require_capability_type(kb, &desc.capability_type)?;
    let mut signatures = Vec::with_capacity(desc.sub_operators.len());
    for sub in &desc.sub_operators {
        if sub == &desc.id {
            return Err(CapabilityError::CyclicDecomposition(desc.id.clone()));
        }
        require_capability(kb, sub)?;
        if reaches(kb, sub, &desc.id) {
            return Err(CapabilityError::CyclicDecomposition(desc.id.clone()));
        }
        signatures.push((
            read_roles(kb, sub, &vdi3682::HAS_INPUT),
            read_roles(kb, sub, &vdi3682::HAS_OUTPUT),
        ));
    }
    if !desc.sub_operators.is_empty() {
        let (ext_in, ext_out) =
            chain_signature(signatures.iter().map(|(i, o)| (i.as_slice(), o.as_slice())));
        let (want_in, want_out) = (kind_counts(&desc.inputs), kind_counts(&desc.outputs));
        if ext_in != want_in || ext_out != want_out {
            return Err(CapabilityError::SignatureMismatch {
                capability: desc.id.clone(),
                detail: format!(
                    "declared {want_in:?} -> {want_out:?}, sub-operators give {ext_in:?} -> {ext_out:?}"
                ),
            });
        }
    }
    for constraint in &desc.property_constraints {
        if !kb.is_instance_of(constraint, &iec::INSTANCE_DESCRIPTION) {
            return Err(CapabilityError::UnknownInstanceDescription(constraint.clone()));
        }
    }

    let id = &desc.id;
    clear_capability(kb, id);
    kb.assert(Assertion::typed(id, &desc.capability_type));
    for (property, tag, roles) in [
        (&*vdi3682::HAS_INPUT, "in", &desc.inputs),
        (&*vdi3682::HAS_OUTPUT, "out", &desc.outputs),
    ] {
        for (i, role) in roles.iter().enumerate() {
            let slot = id.child(&format!("-{tag}-{i}"))?;
            kb.assert(Assertion::link(id, property, &slot));
            kb.assert(Assertion::typed(&slot, &role.kind.class()));
            kb.assert(Assertion::data(&slot, &aur_cap::INDEX, Literal::integer(i as i64)));
            kb.assert(Assertion::data(
                &slot,
                &aur_cap::STATE_LABEL,
                Literal::string(role.state_label.clone()),
            ));
        }
    }
    for (i, sub) in desc.sub_operators.iter().enumerate() {
        let slot = id.child(&format!("-sub-{i}"))?;
        kb.assert(Assertion::link(id, &vdi3682::HAS_SUB_OPERATOR, sub));
        kb.assert(Assertion::link(id, &aur_cap::HAS_SLOT, &slot));
        kb.assert(Assertion::typed(&slot, &aur_cap::SLOT));
        kb.assert(Assertion::link(&slot, &aur_cap::SLOT_OPERATOR, sub));
        kb.assert(Assertion::data(&slot, &aur_cap::INDEX, Literal::integer(i as i64)));
    }
    for constraint in &desc.property_constraints {
        kb.assert(Assertion::link(id, &aur_cap::CONSTRAINED_BY, constraint));
    }
    Ok(id.clone())
}

/// Reads a defined capability back.
pub fn capability(kb: &KnowledgeBase, id: &Iri) -> Result<CapabilityDescription, CapabilityError> {
    require_capability(kb, id)?;
    let capability_type = kb
        .asserted_types(id)
        .into_iter()
        .find(|t| kb.is_subclass_of(t, &vdi3682::PROCESS_OPERATOR).unwrap_or(false))
        .unwrap_or_else(|| vdi3682::PROCESS_OPERATOR.clone());
    Ok(CapabilityDescription {
        id: id.clone(),
        capability_type,
        inputs: read_roles(kb, id, &vdi3682::HAS_INPUT),
        outputs: read_roles(kb, id, &vdi3682::HAS_OUTPUT),
        sub_operators: sub_operators_of(kb, id),
        property_constraints: kb.objects(id, &aur_cap::CONSTRAINED_BY).into_iter().collect(),
    })
}

/// Asserts that `resource` provides `capability`. Idempotent.
pub fn provides_capability(kb: &mut KnowledgeBase, resource: &Iri, capability: &Iri) -> Result<(), CapabilityError> {
    if !kb.is_instance_of(resource, &vdi3682::TECHNICAL_RESOURCE) {
        return Err(CapabilityError::NotATechnicalResource(resource.clone()));
    }
    require_capability(kb, capability)?;
    kb.assert(Assertion::link(resource, &cask::PROVIDES_CAPABILITY, capability));
    Ok(())
}

pub fn capabilities_provided_by(kb: &KnowledgeBase, resource: &Iri) -> BTreeSet<Iri> {
    kb.objects(resource, &cask::PROVIDES_CAPABILITY).into_iter().collect()
}

pub fn providers_of(kb: &KnowledgeBase, capability: &Iri) -> BTreeSet<Iri> {
    kb.subjects(&cask::PROVIDES_CAPABILITY, capability).into_iter().collect()
}

/// Capabilities whose type is `t` or a subclass of it.
pub fn capabilities_of_type(kb: &KnowledgeBase, t: &Iri) -> Result<BTreeSet<Iri>, CapabilityError> {
    kb.require_term(t)?;
    if !kb.is_subclass_of(t, &vdi3682::PROCESS_OPERATOR)? {
        return Err(KbError::UnknownTerm(t.clone()).into());
    }
    Ok(kb.instances_of(t)?)
}

/// Depth-first, left-to-right leaves of the decomposition.
pub fn flatten(kb: &KnowledgeBase, cap: &Iri) -> Result<Vec<Iri>, CapabilityError> {
    require_capability(kb, cap)?;
    let mut leaves = Vec::new();
    let mut stack = vec![cap.clone()];
    while let Some(node) = stack.pop() {
        let subs = sub_operators_of(kb, &node);
        if subs.is_empty() {
            leaves.push(node);
        } else {
            stack.extend(subs.into_iter().rev());
        }
    }
    Ok(leaves)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::seed_kb;
    use crate::vocab::{aur, ieee};

    fn fx(local: &str) -> Iri {
        Iri::new(format!("https://w3id.org/aur/fleet#{local}")).unwrap()
    }

    #[test]
    fn transport_is_a_function() {
        let mut kb = seed_kb().unwrap();
        let desc = CapabilityDescription::new(fx("transport"), aur_cap::TRANSPORT.clone())
            .input(IoKind::Product, "object at source")
            .input(IoKind::Information, "desired destination")
            .output(IoKind::Product, "object at desired location");
        define_capability(&mut kb, &desc).unwrap();
        let id = fx("transport");
        for class in [&*ieee::FUNCTION, &*cask::CAPABILITY, &*vdi3682::PROCESS_OPERATOR] {
            assert!(kb.instances_of(class).unwrap().contains(&id), "{class}");
        }
        assert_eq!(capability(&kb, &id).unwrap(), desc);
        assert_eq!(flatten(&kb, &id).unwrap(), vec![id]);
    }

    #[test]
    fn empty_signature_allowed() {
        let mut kb = seed_kb().unwrap();
        define_capability(&mut kb, &CapabilityDescription::new(fx("noop"), aur_cap::SEND.clone())).unwrap();
        assert!(capabilities_of_type(&kb, &aur_cap::COMMUNICATION).unwrap().contains(&fx("noop")));
    }

    #[test]
    fn unknown_type() {
        let mut kb = seed_kb().unwrap();
        let bad = CapabilityDescription::new(fx("x"), aur::ROBOT.clone());
        assert_eq!(
            define_capability(&mut kb, &bad),
            Err(CapabilityError::UnknownCapabilityType(aur::ROBOT.clone()))
        );
        assert!(matches!(
            capabilities_of_type(&kb, &aur::ROBOT),
            Err(CapabilityError::Kb(KbError::UnknownTerm(_)))
        ));
    }

    #[test]
    fn cycles_rejected_on_redefinition() {
        let mut kb = seed_kb().unwrap();
        let a = CapabilityDescription::new(fx("a"), aur_cap::MOTION.clone());
        define_capability(&mut kb, &a).unwrap();
        let b = CapabilityDescription::new(fx("b"), aur_cap::MOTION.clone()).sub_operators([fx("a")]);
        define_capability(&mut kb, &b).unwrap();
        let a_loop = a.clone().sub_operators([fx("b")]);
        assert_eq!(
            define_capability(&mut kb, &a_loop),
            Err(CapabilityError::CyclicDecomposition(fx("a")))
        );
        let own = a.sub_operators([fx("a")]);
        assert_eq!(define_capability(&mut kb, &own), Err(CapabilityError::CyclicDecomposition(fx("a"))));
    }

    #[test]
    fn signature_mismatch() {
        let mut kb = seed_kb().unwrap();
        let grasp = CapabilityDescription::new(fx("grasp"), aur_cap::GRASP.clone())
            .input(IoKind::Product, "")
            .output(IoKind::Product, "");
        define_capability(&mut kb, &grasp).unwrap();
        let parent = CapabilityDescription::new(fx("p"), aur_cap::TRANSPORT.clone())
            .input(IoKind::Energy, "")
            .output(IoKind::Product, "")
            .sub_operators([fx("grasp")]);
        assert!(matches!(
            define_capability(&mut kb, &parent),
            Err(CapabilityError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn providers() {
        let mut kb = seed_kb().unwrap();
        define_capability(&mut kb, &CapabilityDescription::new(fx("fly"), aur_cap::FLY.clone())).unwrap();
        kb.assert(Assertion::typed(&fx("Quadrocopter1"), &aur::ROBOT));
        kb.assert(Assertion::typed(&fx("camera"), &aur::SENSOR));
        provides_capability(&mut kb, &fx("Quadrocopter1"), &fx("fly")).unwrap();
        let before = kb.assertion_count();
        provides_capability(&mut kb, &fx("Quadrocopter1"), &fx("fly")).unwrap();
        assert_eq!(kb.assertion_count(), before);
        assert!(kb.instances_of(&vdi3682::TECHNICAL_RESOURCE).unwrap().contains(&fx("Quadrocopter1")));
        assert_eq!(
            provides_capability(&mut kb, &fx("camera"), &fx("fly")),
            Err(CapabilityError::NotATechnicalResource(fx("camera")))
        );
        assert_eq!(
            provides_capability(&mut kb, &fx("Quadrocopter1"), &fx("swim")),
            Err(CapabilityError::UnknownCapability(fx("swim")))
        );
        assert_eq!(providers_of(&kb, &fx("fly")), BTreeSet::from([fx("Quadrocopter1")]));
    }

    #[test]
    fn chain_consumes_in_order() {
        let r = |k| IoRole::new(k, "");
        use IoKind::*;
        let a = (vec![r(Energy)], vec![r(Product)]);
        let b = (vec![r(Product), r(Product)], vec![r(Information)]);
        let (ins, outs) = chain_signature([(&a.0[..], &a.1[..]), (&b.0[..], &b.1[..])]);
        assert_eq!(ins, KindCounts::from([(Energy, 1), (Product, 1)]));
        assert_eq!(outs, KindCounts::from([(Information, 1)]));
    }
}
