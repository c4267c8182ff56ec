//! Property aspect: type descriptions, data elements and instance
//! descriptions, plus the requirement check used by the matchmaker.

use std::cmp::Ordering;
use std::fmt;

use thiserror::Error;

use crate::error::KbError;
use crate::iri::Iri;
use crate::kb::{Assertion, KnowledgeBase};
use crate::literal::{Datatype, Literal, Value};
use crate::vocab::{aur_cap, aur_mission, iec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PropertyError {
    #[error("type description {0} is already defined")]
    DuplicateTypeDescription(Iri),
    #[error("unknown type description {0}")]
    UnknownTypeDescription(Iri),
    #[error("unknown owner {0}")]
    UnknownOwner(Iri),
    #[error("{0} is already used by another term")]
    DuplicateId(Iri),
    #[error("expected {expected} values, found {found}")]
    DatatypeMismatch { expected: Datatype, found: Datatype },
    #[error("{0} expressions are not defined for this datatype")]
    UnorderedDatatype(Datatype),
    #[error("interval lower bound exceeds upper bound")]
    InvalidInterval,
    #[error("expected roles requirement vs assurance/actual, got {requirement} vs {offer}")]
    RoleMismatch { requirement: Role, offer: Role },
    #[error("type descriptions differ: {0} vs {1}")]
    TypeDescriptionMismatch(Iri, Iri),
    #[error("malformed instance description {0}")]
    Malformed(Iri),
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypeDescription {
    pub id: Iri,
    pub preferred_name: String,
    pub definition: String,
    pub unit: String,
    pub datatype: Datatype,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Actual,
    Requirement,
    Assurance,
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Actual => "Actual",
            Role::Requirement => "Requirement",
            Role::Assurance => "Assurance",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        [Role::Actual, Role::Requirement, Role::Assurance]
            .into_iter()
            .find(|r| r.name() == name)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Value set of an instance description. Bounds are inclusive.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Equals(Literal),
    LessOrEqual(Literal),
    GreaterOrEqual(Literal),
    Interval(Literal, Literal),
}

impl Expression {
    pub fn name(&self) -> &'static str {
        match self {
            Expression::Equals(_) => "Equals",
            Expression::LessOrEqual(_) => "LessOrEqual",
            Expression::GreaterOrEqual(_) => "GreaterOrEqual",
            Expression::Interval(..) => "Interval",
        }
    }

    fn literals(&self) -> Vec<&Literal> {
        match self {
            Expression::Equals(v) | Expression::LessOrEqual(v) | Expression::GreaterOrEqual(v) => vec![v],
            Expression::Interval(lo, hi) => vec![lo, hi],
        }
    }

    /// Checks the expression against a datatype.
    pub fn check(&self, datatype: Datatype) -> Result<(), PropertyError> {
        for literal in self.literals() {
            if literal.datatype() != datatype {
                return Err(PropertyError::DatatypeMismatch {
                    expected: datatype,
                    found: literal.datatype(),
                });
            }
        }
        if !datatype.is_numeric() && !matches!(self, Expression::Equals(_)) {
            return Err(PropertyError::UnorderedDatatype(datatype));
        }
        if let Expression::Interval(lo, hi) = self {
            if value(lo)?.compare(&value(hi)?) == Some(Ordering::Greater) {
                return Err(PropertyError::InvalidInterval);
            }
        }
        Ok(())
    }

    /// Closed bounds, `None` for unbounded.
    fn bounds(&self) -> Result<(Option<Value>, Option<Value>), PropertyError> {
        Ok(match self {
            Expression::Equals(v) => {
                let x = value(v)?;
                (Some(x.clone()), Some(x))
            }
            Expression::LessOrEqual(v) => (None, Some(value(v)?)),
            Expression::GreaterOrEqual(v) => (Some(value(v)?), None),
            Expression::Interval(lo, hi) => (Some(value(lo)?), Some(value(hi)?)),
        })
    }

    /// Whether this expression's value set is a subset of `other`'s.
    pub fn is_subset_of(&self, other: &Expression) -> Result<bool, PropertyError> {
        let (lo, hi) = self.bounds()?;
        let (olo, ohi) = other.bounds()?;
        let lower_ok = match (&olo, &lo) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => matches!(s.compare(o), Some(Ordering::Greater | Ordering::Equal)),
        };
        let upper_ok = match (&ohi, &hi) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(o), Some(s)) => matches!(s.compare(o), Some(Ordering::Less | Ordering::Equal)),
        };
        Ok(lower_ok && upper_ok)
    }
}

fn value(literal: &Literal) -> Result<Value, PropertyError> {
    Ok(literal.value()?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceDescription {
    pub id: Iri,
    pub type_description: Iri,
    pub role: Role,
    pub expression: Expression,
}

impl InstanceDescription {
    pub fn new(id: Iri, type_description: Iri, role: Role, expression: Expression) -> Self {
        InstanceDescription {
            id,
            type_description,
            role,
            expression,
        }
    }
}

pub fn define_type_description(kb: &mut KnowledgeBase, td: &TypeDescription) -> Result<Iri, PropertyError> {
    if kb.is_instance_of(&td.id, &iec::TYPE_DESCRIPTION) {
        return Err(PropertyError::DuplicateTypeDescription(td.id.clone()));
    }
    if td.datatype == Datatype::Iri {
        return Err(PropertyError::UnorderedDatatype(Datatype::Iri));
    }
    let id = &td.id;
    kb.assert(Assertion::typed(id, &iec::TYPE_DESCRIPTION));
    kb.assert(Assertion::data(id, &iec::PREFERRED_NAME, Literal::string(td.preferred_name.clone())));
    kb.assert(Assertion::data(id, &iec::DEFINITION, Literal::string(td.definition.clone())));
    kb.assert(Assertion::data(id, &iec::UNIT, Literal::string(td.unit.clone())));
    kb.assert(Assertion::data(id, &iec::VALUE_TYPE, Literal::string(td.datatype.tag())));
    Ok(id.clone())
}

pub fn type_description(kb: &KnowledgeBase, id: &Iri) -> Result<TypeDescription, PropertyError> {
    if !kb.is_instance_of(id, &iec::TYPE_DESCRIPTION) {
        return Err(PropertyError::UnknownTypeDescription(id.clone()));
    }
    let text = |p: &Iri| {
        kb.literal(id, p)
            .map(|l| l.lexical().to_string())
            .unwrap_or_default()
    };
    let datatype = Datatype::from_tag(&text(&iec::VALUE_TYPE))
        .ok_or_else(|| PropertyError::UnknownTypeDescription(id.clone()))?;
    Ok(TypeDescription {
        id: id.clone(),
        preferred_name: text(&iec::PREFERRED_NAME),
        definition: text(&iec::DEFINITION),
        unit: text(&iec::UNIT),
        datatype,
    })
}

/// The data element of `owner` for `td`, if one exists.
pub fn data_element(kb: &KnowledgeBase, owner: &Iri, td: &Iri) -> Option<Iri> {
    kb.objects(owner, &iec::HAS_DATA_ELEMENT)
        .into_iter()
        .find(|de| kb.object(de, &iec::HAS_TYPE_DESCRIPTION).as_ref() == Some(td))
}

fn ensure_data_element(kb: &mut KnowledgeBase, owner: &Iri, td: &Iri) -> Result<Iri, PropertyError> {
    if let Some(de) = data_element(kb, owner, td) {
        return Ok(de);
    }
    let de = owner.child(&format!("-{}", td.local_name()))?;
    kb.assert(Assertion::typed(&de, &iec::DATA_ELEMENT));
    kb.assert(Assertion::link(&de, &iec::HAS_TYPE_DESCRIPTION, td));
    kb.assert(Assertion::link(owner, &iec::HAS_DATA_ELEMENT, &de));
    Ok(de)
}

/// Creates the owner's data element for `td` without any instance description.
pub fn declare_data_element(kb: &mut KnowledgeBase, owner: &Iri, td: &Iri) -> Result<Iri, PropertyError> {
    if kb.about(owner).next().is_none() {
        return Err(PropertyError::UnknownOwner(owner.clone()));
    }
    type_description(kb, td)?;
    ensure_data_element(kb, owner, td)
}

/// Type descriptions for which `owner` has a data element.
pub fn data_element_types(kb: &KnowledgeBase, owner: &Iri) -> Vec<Iri> {
    kb.objects(owner, &iec::HAS_DATA_ELEMENT)
        .iter()
        .filter_map(|de| kb.object(de, &iec::HAS_TYPE_DESCRIPTION))
        .collect()
}

/// Links `inst` to the owner's data element for `td`, creating it if absent.
/// Returns the data element.
pub fn attach(
    kb: &mut KnowledgeBase,
    owner: &Iri,
    td: &Iri,
    inst: &InstanceDescription,
) -> Result<Iri, PropertyError> {
    if kb.about(owner).next().is_none() {
        return Err(PropertyError::UnknownOwner(owner.clone()));
    }
    let desc = type_description(kb, td)?;
    if &inst.type_description != td {
        return Err(PropertyError::TypeDescriptionMismatch(
            inst.type_description.clone(),
            td.clone(),
        ));
    }
    inst.expression.check(desc.datatype)?;
    if kb.about(&inst.id).next().is_some() {
        return Err(PropertyError::DuplicateId(inst.id.clone()));
    }

    let de = ensure_data_element(kb, owner, td)?;
    let id = &inst.id;
    kb.assert(Assertion::typed(id, &iec::INSTANCE_DESCRIPTION));
    kb.assert(Assertion::link(id, &iec::DESCRIBES, &de));
    write_expression(kb, inst);
    Ok(de)
}

/// Stores a free-standing instance description, as used for mission requirements.
pub fn store_instance(kb: &mut KnowledgeBase, inst: &InstanceDescription) -> Result<(), PropertyError> {
    let desc = type_description(kb, &inst.type_description)?;
    inst.expression.check(desc.datatype)?;
    kb.assert(Assertion::typed(&inst.id, &iec::INSTANCE_DESCRIPTION));
    kb.retract_all(&inst.id, &aur_mission::CONSTRAINS);
    kb.assert(Assertion::link(&inst.id, &aur_mission::CONSTRAINS, &inst.type_description));
    write_expression(kb, inst);
    Ok(())
}

fn write_expression(kb: &mut KnowledgeBase, inst: &InstanceDescription) {
    let id = &inst.id;
    kb.set_literal(id, &iec::ROLE, Literal::string(inst.role.name()));
    kb.set_literal(id, &iec::EXPRESSION, Literal::string(inst.expression.name()));
    for p in [&*iec::VALUE, &*iec::LOWER_BOUND, &*iec::UPPER_BOUND] {
        kb.retract_all(id, p);
    }
    match &inst.expression {
        Expression::Equals(v) | Expression::LessOrEqual(v) | Expression::GreaterOrEqual(v) => {
            kb.assert(Assertion::data(id, &iec::VALUE, v.clone()));
        }
        Expression::Interval(lo, hi) => {
            kb.assert(Assertion::data(id, &iec::LOWER_BOUND, lo.clone()));
            kb.assert(Assertion::data(id, &iec::UPPER_BOUND, hi.clone()));
        }
    }
}

/// Reads an instance description back.
pub fn instance_description(kb: &KnowledgeBase, id: &Iri) -> Result<InstanceDescription, PropertyError> {
    let malformed = || PropertyError::Malformed(id.clone());
    let text = |p: &Iri| kb.literal(id, p).map(|l| l.lexical().to_string());
    let role = text(&iec::ROLE).and_then(|r| Role::parse(&r)).ok_or_else(malformed)?;
    let td = kb
        .object(id, &aur_mission::CONSTRAINS)
        .or_else(|| {
            let de = kb.object(id, &iec::DESCRIBES)?;
            kb.object(&de, &iec::HAS_TYPE_DESCRIPTION)
        })
        .ok_or_else(malformed)?;
    let get = |p: &Iri| kb.literal(id, p).ok_or_else(malformed);
    let expression = match text(&iec::EXPRESSION).ok_or_else(malformed)?.as_str() {
        "Equals" => Expression::Equals(get(&iec::VALUE)?),
        "LessOrEqual" => Expression::LessOrEqual(get(&iec::VALUE)?),
        "GreaterOrEqual" => Expression::GreaterOrEqual(get(&iec::VALUE)?),
        "Interval" => Expression::Interval(get(&iec::LOWER_BOUND)?, get(&iec::UPPER_BOUND)?),
        _ => return Err(malformed()),
    };
    Ok(InstanceDescription {
        id: id.clone(),
        type_description: td,
        role,
        expression,
    })
}

/// Instance descriptions attached to `owner`, optionally restricted to one type description.
pub fn instances_of_owner(
    kb: &KnowledgeBase,
    owner: &Iri,
    td: Option<&Iri>,
) -> Result<Vec<InstanceDescription>, PropertyError> {
    let mut out = Vec::new();
    for de in kb.objects(owner, &iec::HAS_DATA_ELEMENT) {
        if let Some(td) = td {
            if kb.object(&de, &iec::HAS_TYPE_DESCRIPTION).as_ref() != Some(td) {
                continue;
            }
        }
        for inst in kb.subjects(&iec::DESCRIBES, &de) {
            out.push(instance_description(kb, &inst)?);
        }
    }
    Ok(out)
}

/// Offers a capability carries: attached instances plus listed constraints.
pub fn capability_offers(kb: &KnowledgeBase, capability: &Iri) -> Result<Vec<InstanceDescription>, PropertyError> {
    let mut out = instances_of_owner(kb, capability, None)?;
    for inst in kb.objects(capability, &aur_cap::CONSTRAINED_BY) {
        let inst = instance_description(kb, &inst)?;
        if !out.contains(&inst) {
            out.push(inst);
        }
    }
    Ok(out)
}

/// Whether `offer` meets `requirement`.
///
/// An assurance must cover every value the requirement admits. An actual
/// value must lie within the requirement.
pub fn satisfies(requirement: &InstanceDescription, offer: &InstanceDescription) -> Result<bool, PropertyError> {
    if requirement.role != Role::Requirement || offer.role == Role::Requirement {
        return Err(PropertyError::RoleMismatch {
            requirement: requirement.role,
            offer: offer.role,
        });
    }
    if requirement.type_description != offer.type_description {
        return Err(PropertyError::TypeDescriptionMismatch(
            requirement.type_description.clone(),
            offer.type_description.clone(),
        ));
    }
    match offer.role {
        Role::Assurance => requirement.expression.is_subset_of(&offer.expression),
        _ => offer.expression.is_subset_of(&requirement.expression),
    }
}
