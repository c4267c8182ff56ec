//! In-memory ontology store: prefixes, class-level axioms, instance assertions
//! and the declared vocabulary.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Bound;
use std::sync::{Arc, OnceLock};

use crate::error::KbError;
use crate::iri::Iri;
use crate::literal::Literal;
use crate::reasoner::Inference;
use crate::vocab::{self, rdf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomKind {
    SubClassOf,
    EquivalentClass,
    SubPropertyOf,
    /// `∃ on_property . object ⊑ subject`
    ExistentialRestrictionSubClass,
}

/// Class- or property-level statement.
///
/// For [`AxiomKind::ExistentialRestrictionSubClass`] the `subject` is the
/// classified superclass and `object` is the restriction filler: anything
/// linked through `on_property` to an instance of `object` is an instance of
/// `subject`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Axiom {
    kind: AxiomKind,
    subject: Iri,
    object: Iri,
    on_property: Option<Iri>,
}

impl Axiom {
    pub fn new(
        kind: AxiomKind,
        subject: Iri,
        object: Iri,
        on_property: Option<Iri>,
    ) -> Result<Self, KbError> {
        let needs_property = kind == AxiomKind::ExistentialRestrictionSubClass;
        if needs_property != on_property.is_some() {
            return Err(KbError::InvalidAxiom(format!(
                "{kind:?} {} onProperty",
                if needs_property { "requires" } else { "forbids" }
            )));
        }
        Ok(Axiom {
            kind,
            subject,
            object,
            on_property,
        })
    }

    pub fn sub_class_of(sub: Iri, sup: Iri) -> Self {
        Axiom {
            kind: AxiomKind::SubClassOf,
            subject: sub,
            object: sup,
            on_property: None,
        }
    }

    pub fn equivalent_class(a: Iri, b: Iri) -> Self {
        Axiom {
            kind: AxiomKind::EquivalentClass,
            subject: a,
            object: b,
            on_property: None,
        }
    }

    pub fn sub_property_of(sub: Iri, sup: Iri) -> Self {
        Axiom {
            kind: AxiomKind::SubPropertyOf,
            subject: sub,
            object: sup,
            on_property: None,
        }
    }

    /// `∃ property . filler ⊑ superclass`
    pub fn existential(superclass: Iri, property: Iri, filler: Iri) -> Self {
        Axiom {
            kind: AxiomKind::ExistentialRestrictionSubClass,
            subject: superclass,
            object: filler,
            on_property: Some(property),
        }
    }

    pub fn kind(&self) -> AxiomKind {
        self.kind
    }

    pub fn subject(&self) -> &Iri {
        &self.subject
    }

    pub fn object(&self) -> &Iri {
        &self.object
    }

    pub fn on_property(&self) -> Option<&Iri> {
        self.on_property.as_ref()
    }
}

/// Instance-level statement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    Type {
        individual: Iri,
        class: Iri,
    },
    ObjectLink {
        subject: Iri,
        property: Iri,
        object: Iri,
    },
    DataLink {
        subject: Iri,
        property: Iri,
        literal: Literal,
    },
}

impl Assertion {
    pub fn typed(individual: &Iri, class: &Iri) -> Self {
        Assertion::Type {
            individual: individual.clone(),
            class: class.clone(),
        }
    }

    pub fn link(subject: &Iri, property: &Iri, object: &Iri) -> Self {
        Assertion::ObjectLink {
            subject: subject.clone(),
            property: property.clone(),
            object: object.clone(),
        }
    }

    pub fn data(subject: &Iri, property: &Iri, literal: Literal) -> Self {
        Assertion::DataLink {
            subject: subject.clone(),
            property: property.clone(),
            literal,
        }
    }

    pub fn subject(&self) -> &Iri {
        match self {
            Assertion::Type { individual, .. } => individual,
            Assertion::ObjectLink { subject, .. } | Assertion::DataLink { subject, .. } => subject,
        }
    }

    fn into_triple(self) -> (Iri, Iri, Node) {
        match self {
            Assertion::Type { individual, class } => (individual, rdf::TYPE.clone(), Node::Iri(class)),
            Assertion::ObjectLink {
                subject,
                property,
                object,
            } => (subject, property, Node::Iri(object)),
            Assertion::DataLink {
                subject,
                property,
                literal,
            } => (subject, property, Node::Literal(literal)),
        }
    }

    fn from_triple(subject: &Iri, predicate: &Iri, object: &Node) -> Self {
        match object {
            Node::Iri(o) if predicate == &*rdf::TYPE => Assertion::typed(subject, o),
            Node::Iri(o) => Assertion::link(subject, predicate, o),
            Node::Literal(l) => Assertion::data(subject, predicate, l.clone()),
        }
    }
}

/// Object position of a stored triple.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Iri(Iri),
    Literal(Literal),
}

impl Node {
    fn min() -> Self {
        Node::Iri(Iri::min())
    }
}

/// Role a vocabulary term plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Class,
    ObjectProperty,
    DataProperty,
    Individual,
}

/// Prefixes, axioms, assertions and vocabulary, with a lazily built
/// inference cache that is dropped on every mutation.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeBase {
    prefixes: BTreeMap<String, String>,
    axioms: BTreeSet<Axiom>,
    spo: BTreeSet<(Iri, Iri, Node)>,
    pos: BTreeSet<(Iri, Node, Iri)>,
    vocabulary: BTreeMap<Iri, TermKind>,
    inference: OnceLock<Arc<Inference>>,
}

impl PartialEq for KnowledgeBase {
    fn eq(&self, other: &Self) -> bool {
        self.prefixes == other.prefixes
            && self.axioms == other.axioms
            && self.spo == other.spo
            && self.vocabulary == other.vocabulary
    }
}

impl Eq for KnowledgeBase {}

impl KnowledgeBase {
    /// Empty knowledge base with the `rdf`, `rdfs`, `owl` and `xsd` prefixes bound.
    pub fn new() -> Self {
        let mut kb = KnowledgeBase::default();
        for (name, ns) in vocab::standard_prefixes() {
            kb.prefixes.insert(name.to_string(), ns.to_string());
        }
        kb
    }

    /// Knowledge base with the standard and model prefixes bound.
    pub fn with_model_prefixes() -> Self {
        let mut kb = KnowledgeBase::new();
        for (name, ns) in vocab::model_prefixes() {
            kb.prefixes.insert(name.to_string(), ns.to_string());
        }
        kb
    }

    fn invalidate(&mut self) {
        self.inference = OnceLock::new();
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Binds or rebinds a prefix.
    pub fn bind_prefix(&mut self, name: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(name.into(), namespace.into());
    }

    /// Expands `prefix:local`, or accepts an absolute IRI unchanged when the
    /// part before the colon is not a bound prefix.
    pub fn expand(&self, curie: &str) -> Result<Iri, KbError> {
        if let Some(inner) = curie.strip_prefix('<').and_then(|s| s.strip_suffix('>')) {
            return Iri::new(inner);
        }
        if let Some((prefix, local)) = curie.split_once(':') {
            if let Some(ns) = self.prefixes.get(prefix) {
                return Iri::new(format!("{ns}{local}"));
            }
        }
        Iri::new(curie)
    }

    /// Shortest `prefix:local` form of `iri`, or `<iri>` when no prefix fits.
    pub fn compact(&self, iri: &Iri) -> String {
        let mut best: Option<(&str, &str)> = None;
        for (name, ns) in &self.prefixes {
            if let Some(local) = iri.as_str().strip_prefix(ns.as_str()) {
                if crate::turtle::is_plain_local(local)
                    && best.is_none_or(|(_, b)| b.len() < ns.len())
                {
                    best = Some((name, ns));
                }
            }
        }
        match best {
            Some((name, ns)) => format!("{name}:{}", &iri.as_str()[ns.len()..]),
            None => format!("<{iri}>"),
        }
    }

    pub fn vocabulary(&self) -> &BTreeMap<Iri, TermKind> {
        &self.vocabulary
    }

    pub fn term_kind(&self, iri: &Iri) -> Option<TermKind> {
        self.vocabulary.get(iri).copied()
    }

    pub fn contains_term(&self, iri: &Iri) -> bool {
        self.vocabulary.contains_key(iri)
    }

    pub fn require_term(&self, iri: &Iri) -> Result<(), KbError> {
        if self.contains_term(iri) {
            Ok(())
        } else {
            Err(KbError::UnknownTerm(iri.clone()))
        }
    }

    /// Declares `iri` with `kind` unless it is already declared. Returns
    /// whether the vocabulary changed.
    pub fn declare(&mut self, iri: &Iri, kind: TermKind) -> bool {
        if self.vocabulary.contains_key(iri) {
            return false;
        }
        self.vocabulary.insert(iri.clone(), kind);
        self.invalidate();
        true
    }

    /// Declares `iri` with `kind`, overriding any previously inferred kind.
    pub fn set_kind(&mut self, iri: &Iri, kind: TermKind) {
        if self.vocabulary.insert(iri.clone(), kind) != Some(kind) {
            self.invalidate();
        }
    }

    pub fn add_axiom(&mut self, axiom: Axiom) -> bool {
        let (class_kind, prop_kind) = match axiom.kind {
            AxiomKind::SubPropertyOf => (TermKind::ObjectProperty, TermKind::ObjectProperty),
            _ => (TermKind::Class, TermKind::ObjectProperty),
        };
        self.declare(&axiom.subject, class_kind);
        self.declare(&axiom.object, class_kind);
        if let Some(p) = &axiom.on_property {
            self.declare(p, prop_kind);
        }
        let added = self.axioms.insert(axiom);
        if added {
            self.invalidate();
        }
        added
    }

    pub fn remove_axiom(&mut self, axiom: &Axiom) -> bool {
        let removed = self.axioms.remove(axiom);
        if removed {
            self.invalidate();
        }
        removed
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Axiom> {
        self.axioms.iter()
    }

    pub fn axiom_count(&self) -> usize {
        self.axioms.len()
    }

    pub fn contains_axiom(&self, axiom: &Axiom) -> bool {
        self.axioms.contains(axiom)
    }

    /// Adds an assertion, declaring any new terms. Returns whether it was new.
    pub fn assert(&mut self, assertion: Assertion) -> bool {
        match &assertion {
            Assertion::Type { individual, class } => {
                self.declare(individual, TermKind::Individual);
                self.declare(class, TermKind::Class);
            }
            Assertion::ObjectLink {
                subject,
                property,
                object,
            } => {
                self.declare(subject, TermKind::Individual);
                self.declare(property, TermKind::ObjectProperty);
                self.declare(object, TermKind::Individual);
            }
            Assertion::DataLink {
                subject, property, ..
            } => {
                self.declare(subject, TermKind::Individual);
                self.declare(property, TermKind::DataProperty);
            }
        }
        let (s, p, o) = assertion.into_triple();
        if self.spo.contains(&(s.clone(), p.clone(), o.clone())) {
            return false;
        }
        self.pos.insert((p.clone(), o.clone(), s.clone()));
        self.spo.insert((s, p, o));
        self.invalidate();
        true
    }

    pub fn retract(&mut self, assertion: &Assertion) -> bool {
        let (s, p, o) = assertion.clone().into_triple();
        let removed = self.spo.remove(&(s.clone(), p.clone(), o.clone()));
        if removed {
            self.pos.remove(&(p, o, s));
            self.invalidate();
        }
        removed
    }

    pub fn contains_assertion(&self, assertion: &Assertion) -> bool {
        let (s, p, o) = assertion.clone().into_triple();
        self.spo.contains(&(s, p, o))
    }

    pub fn assertions(&self) -> impl Iterator<Item = Assertion> + '_ {
        self.spo
            .iter()
            .map(|(s, p, o)| Assertion::from_triple(s, p, o))
    }

    pub fn assertion_count(&self) -> usize {
        self.spo.len()
    }

    /// All assertions whose subject is `subject`.
    pub fn about<'a>(&'a self, subject: &'a Iri) -> impl Iterator<Item = Assertion> + 'a {
        self.spo
            .range((
                Bound::Included((subject.clone(), Iri::min(), Node::min())),
                Bound::Unbounded,
            ))
            .take_while(move |(s, _, _)| s == subject)
            .map(|(s, p, o)| Assertion::from_triple(s, p, o))
    }

    fn objects_raw<'a>(
        &'a self,
        subject: &'a Iri,
        property: &'a Iri,
    ) -> impl Iterator<Item = &'a Node> + 'a {
        self.spo
            .range((
                Bound::Included((subject.clone(), property.clone(), Node::min())),
                Bound::Unbounded,
            ))
            .take_while(move |(s, p, _)| s == subject && p == property)
            .map(|(_, _, o)| o)
    }

    /// IRI objects of `(subject, property, ?)`.
    pub fn objects(&self, subject: &Iri, property: &Iri) -> Vec<Iri> {
        self.objects_raw(subject, property)
            .filter_map(|o| match o {
                Node::Iri(i) => Some(i.clone()),
                Node::Literal(_) => None,
            })
            .collect()
    }

    pub fn object(&self, subject: &Iri, property: &Iri) -> Option<Iri> {
        self.objects(subject, property).into_iter().next()
    }

    /// Literal objects of `(subject, property, ?)`.
    pub fn literals(&self, subject: &Iri, property: &Iri) -> Vec<Literal> {
        self.objects_raw(subject, property)
            .filter_map(|o| match o {
                Node::Literal(l) => Some(l.clone()),
                Node::Iri(_) => None,
            })
            .collect()
    }

    pub fn literal(&self, subject: &Iri, property: &Iri) -> Option<Literal> {
        self.literals(subject, property).into_iter().next()
    }

    /// Subjects of `(?, property, object)`.
    pub fn subjects(&self, property: &Iri, object: &Iri) -> Vec<Iri> {
        let node = Node::Iri(object.clone());
        self.pos
            .range((
                Bound::Included((property.clone(), node.clone(), Iri::min())),
                Bound::Unbounded,
            ))
            .take_while(|(p, o, _)| p == property && o == &node)
            .map(|(_, _, s)| s.clone())
            .collect()
    }

    /// All `(subject, object)` pairs linked by `property`.
    pub fn links(&self, property: &Iri) -> Vec<(Iri, Iri)> {
        self.pos
            .range((
                Bound::Included((property.clone(), Node::min(), Iri::min())),
                Bound::Unbounded,
            ))
            .take_while(|(p, _, _)| p == property)
            .filter_map(|(_, o, s)| match o {
                Node::Iri(o) => Some((s.clone(), o.clone())),
                Node::Literal(_) => None,
            })
            .collect()
    }

    /// Classes directly asserted for `individual`.
    pub fn asserted_types(&self, individual: &Iri) -> Vec<Iri> {
        self.objects(individual, &rdf::TYPE)
    }

    pub fn has_asserted_type(&self, individual: &Iri, class: &Iri) -> bool {
        self.contains_assertion(&Assertion::typed(individual, class))
    }

    /// Removes every assertion `(subject, property, ?)`.
    pub fn retract_all(&mut self, subject: &Iri, property: &Iri) -> usize {
        let doomed: Vec<(Iri, Iri, Node)> = self
            .objects_raw(subject, property)
            .map(|o| (subject.clone(), property.clone(), o.clone()))
            .collect();
        for (s, p, o) in &doomed {
            self.spo.remove(&(s.clone(), p.clone(), o.clone()));
            self.pos.remove(&(p.clone(), o.clone(), s.clone()));
        }
        if !doomed.is_empty() {
            self.invalidate();
        }
        doomed.len()
    }

    /// Replaces all `(subject, property, ?)` with a single data value.
    pub fn set_literal(&mut self, subject: &Iri, property: &Iri, literal: Literal) {
        self.retract_all(subject, property);
        self.assert(Assertion::data(subject, property, literal));
    }

    /// Unions `other` into `self`. Prefixes bound to different namespaces are rejected.
    pub fn merge(&mut self, other: &KnowledgeBase) -> Result<(), KbError> {
        for (name, ns) in &other.prefixes {
            if let Some(existing) = self.prefixes.get(name) {
                if existing != ns {
                    return Err(KbError::PrefixConflict {
                        prefix: name.clone(),
                        existing: existing.clone(),
                        new: ns.clone(),
                    });
                }
            }
        }
        for (name, ns) in &other.prefixes {
            self.prefixes.insert(name.clone(), ns.clone());
        }
        for (iri, kind) in &other.vocabulary {
            self.vocabulary.entry(iri.clone()).or_insert(*kind);
        }
        self.axioms.extend(other.axioms.iter().cloned());
        self.spo.extend(other.spo.iter().cloned());
        self.pos.extend(other.pos.iter().cloned());
        self.invalidate();
        Ok(())
    }

    /// Cached inference over the current contents.
    pub fn inference(&self) -> Arc<Inference> {
        self.inference
            .get_or_init(|| Arc::new(Inference::build(self)))
            .clone()
    }

    /// Reflexive-transitive subsumption with equivalences (and subclass
    /// cycles) collapsed.
    pub fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, KbError> {
        self.require_term(sub)?;
        self.require_term(sup)?;
        Ok(self.inference().is_subclass_of(sub, sup))
    }

    /// Every class mutually subsumed with `class`, `class` included.
    pub fn equivalence_class_of(&self, class: &Iri) -> Result<BTreeSet<Iri>, KbError> {
        self.require_term(class)?;
        Ok(self.inference().equivalents(class))
    }

    /// All superclasses of `class`, itself included.
    pub fn superclasses_of(&self, class: &Iri) -> Result<BTreeSet<Iri>, KbError> {
        self.require_term(class)?;
        Ok(self.inference().superclasses(class))
    }

    /// Individuals that are members of `class` after classification.
    pub fn instances_of(&self, class: &Iri) -> Result<BTreeSet<Iri>, KbError> {
        self.require_term(class)?;
        Ok(self.inference().instances_of(class))
    }

    pub fn is_instance_of(&self, individual: &Iri, class: &Iri) -> bool {
        self.inference().is_instance_of(individual, class)
    }

    pub fn is_subproperty_of(&self, sub: &Iri, sup: &Iri) -> Result<bool, KbError> {
        self.require_term(sub)?;
        self.require_term(sup)?;
        Ok(self.inference().is_subproperty_of(sub, sup))
    }

    /// Declared classes.
    pub fn classes(&self) -> impl Iterator<Item = &Iri> {
        self.vocabulary
            .iter()
            .filter(|(_, k)| **k == TermKind::Class)
            .map(|(i, _)| i)
    }
}
