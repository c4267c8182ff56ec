//! Closure computation behind the knowledge-base queries.
//!
//! Classes form a graph with `sub → super` edges for `SubClassOf` and edges
//! in both directions for `EquivalentClass`. Strongly connected components
//! are equivalence nodes; reachability over the condensed DAG is subsumption.
//! Individuals are then classified to a fixpoint, applying the existential
//! restriction axioms on top of asserted types.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::iri::Iri;
use crate::kb::{AxiomKind, KnowledgeBase, TermKind};
use crate::vocab::rdf;

#[derive(Clone, Debug)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet(vec![0; len.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }
    fn union_with(&mut self, other: &BitSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= *b;
        }
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, bits)| {
            (0..64).filter(move |b| bits & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

/// Precomputed taxonomy and classification for one knowledge-base snapshot.
#[derive(Debug)]
pub struct Inference {
    classes: Vec<Iri>,
    index: HashMap<Iri, usize>,
    /// component id per class
    component: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// superclass components reachable from each component, itself included
    reach: Vec<BitSet>,
    property_supers: HashMap<Iri, HashSet<Iri>>,
    /// all classes of each individual (closed upwards)
    types: HashMap<Iri, BTreeSet<Iri>>,
    instances: HashMap<Iri, BTreeSet<Iri>>,
}

impl Inference {
    pub fn build(kb: &KnowledgeBase) -> Self {
        let mut classes: BTreeSet<Iri> = kb.classes().cloned().collect();
        for axiom in kb.axioms() {
            if axiom.kind() != AxiomKind::SubPropertyOf {
                classes.insert(axiom.subject().clone());
                classes.insert(axiom.object().clone());
            }
        }
        for (_, class) in kb.links(&rdf::TYPE) {
            classes.insert(class);
        }
        let classes: Vec<Iri> = classes.into_iter().collect();
        let index: HashMap<Iri, usize> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();

        let mut edges: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
        for axiom in kb.axioms() {
            let (s, o) = (index.get(axiom.subject()), index.get(axiom.object()));
            match (axiom.kind(), s, o) {
                (AxiomKind::SubClassOf, Some(&s), Some(&o)) => edges[s].push(o),
                (AxiomKind::EquivalentClass, Some(&s), Some(&o)) => {
                    edges[s].push(o);
                    edges[o].push(s);
                }
                _ => {}
            }
        }

        let (component, members) = strongly_connected(&edges);
        // Tarjan emits components sinks-first, so every successor component
        // has a smaller id and is complete when we reach it.
        let mut reach: Vec<BitSet> = Vec::with_capacity(members.len());
        for (cid, nodes) in members.iter().enumerate() {
            let mut set = BitSet::new(members.len());
            set.insert(cid);
            for &n in nodes {
                for &succ in &edges[n] {
                    let sc = component[succ];
                    if sc != cid {
                        let succ_reach = reach[sc].clone();
                        set.union_with(&succ_reach);
                    }
                }
            }
            reach.push(set);
        }

        let property_supers = property_closure(kb);

        let mut inference = Inference {
            classes,
            index,
            component,
            members,
            reach,
            property_supers,
            types: HashMap::new(),
            instances: HashMap::new(),
        };
        inference.classify(kb);
        inference
    }

    fn supers_of_index(&self, class: usize) -> impl Iterator<Item = &Iri> + '_ {
        self.reach[self.component[class]]
            .iter()
            .flat_map(move |c| self.members[c].iter().map(move |&m| &self.classes[m]))
    }

    pub fn is_subclass_of(&self, sub: &Iri, sup: &Iri) -> bool {
        if sub == sup {
            return true;
        }
        match (self.index.get(sub), self.index.get(sup)) {
            (Some(&a), Some(&b)) => self.reach[self.component[a]].contains(self.component[b]),
            _ => false,
        }
    }

    pub fn equivalents(&self, class: &Iri) -> BTreeSet<Iri> {
        match self.index.get(class) {
            Some(&i) => self.members[self.component[i]]
                .iter()
                .map(|&m| self.classes[m].clone())
                .collect(),
            None => BTreeSet::from([class.clone()]),
        }
    }

    pub fn superclasses(&self, class: &Iri) -> BTreeSet<Iri> {
        match self.index.get(class) {
            Some(&i) => self.supers_of_index(i).cloned().collect(),
            None => BTreeSet::from([class.clone()]),
        }
    }

    pub fn is_subproperty_of(&self, sub: &Iri, sup: &Iri) -> bool {
        sub == sup
            || self
                .property_supers
                .get(sub)
                .is_some_and(|supers| supers.contains(sup))
    }

    pub fn instances_of(&self, class: &Iri) -> BTreeSet<Iri> {
        self.instances.get(class).cloned().unwrap_or_default()
    }

    pub fn is_instance_of(&self, individual: &Iri, class: &Iri) -> bool {
        self.types
            .get(individual)
            .is_some_and(|types| types.contains(class))
    }

    /// Inferred classes of `individual`.
    pub fn types_of(&self, individual: &Iri) -> BTreeSet<Iri> {
        self.types.get(individual).cloned().unwrap_or_default()
    }

    fn add_type_closed(&self, types: &mut BTreeSet<Iri>, class: &Iri) -> bool {
        if types.contains(class) {
            return false;
        }
        match self.index.get(class) {
            Some(&i) => types.extend(self.supers_of_index(i).cloned()),
            None => {
                types.insert(class.clone());
            }
        }
        true
    }

    fn classify(&mut self, kb: &KnowledgeBase) {
        let mut types: HashMap<Iri, BTreeSet<Iri>> = HashMap::new();
        for (individual, class) in kb.links(&rdf::TYPE) {
            let entry = types.entry(individual).or_default();
            self.add_type_closed(entry, &class);
        }

        let restrictions: Vec<(Iri, Iri, Iri)> = kb
            .axioms()
            .filter(|a| a.kind() == AxiomKind::ExistentialRestrictionSubClass)
            .filter_map(|a| {
                Some((
                    a.subject().clone(),
                    a.on_property()?.clone(),
                    a.object().clone(),
                ))
            })
            .collect();

        if !restrictions.is_empty() {
            let object_properties: Vec<Iri> = kb
                .vocabulary()
                .iter()
                .filter(|(_, k)| **k == TermKind::ObjectProperty)
                .map(|(i, _)| i.clone())
                .collect();
            // (restriction property, linked pairs through it or any subproperty)
            let mut linked: Vec<(usize, Vec<(Iri, Iri)>)> = Vec::new();
            for (ri, (_, property, _)) in restrictions.iter().enumerate() {
                let mut pairs = Vec::new();
                for p in &object_properties {
                    if self.is_subproperty_of(p, property) {
                        pairs.extend(kb.links(p));
                    }
                }
                linked.push((ri, pairs));
            }
            loop {
                let mut changed = false;
                for (ri, pairs) in &linked {
                    let (superclass, _, filler) = &restrictions[*ri];
                    for (x, y) in pairs {
                        let filler_ok = types.get(y).is_some_and(|t| t.contains(filler));
                        if filler_ok {
                            let entry = types.entry(x.clone()).or_default();
                            if self.add_type_closed(entry, superclass) {
                                changed = true;
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
        }

        let mut instances: HashMap<Iri, BTreeSet<Iri>> = HashMap::new();
        for (individual, classes) in &types {
            for class in classes {
                instances
                    .entry(class.clone())
                    .or_default()
                    .insert(individual.clone());
            }
        }
        self.types = types;
        self.instances = instances;
    }
}

fn property_closure(kb: &KnowledgeBase) -> HashMap<Iri, HashSet<Iri>> {
    let mut direct: HashMap<Iri, Vec<Iri>> = HashMap::new();
    for axiom in kb.axioms() {
        if axiom.kind() == AxiomKind::SubPropertyOf {
            direct
                .entry(axiom.subject().clone())
                .or_default()
                .push(axiom.object().clone());
        }
    }
    let mut closure = HashMap::new();
    for start in direct.keys() {
        let mut seen: HashSet<Iri> = HashSet::new();
        let mut stack = vec![start.clone()];
        while let Some(p) = stack.pop() {
            if let Some(supers) = direct.get(&p) {
                for s in supers {
                    if seen.insert(s.clone()) {
                        stack.push(s.clone());
                    }
                }
            }
        }
        closure.insert(start.clone(), seen);
    }
    closure
}

/// Iterative Tarjan. Returns the component of each node and the members of
/// each component, components numbered in reverse topological order.
fn strongly_connected(edges: &[Vec<usize>]) -> (Vec<usize>, Vec<Vec<usize>>) {
    const UNVISITED: usize = usize::MAX;
    let n = edges.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![UNVISITED; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < edges[v].len() {
                let w = edges[v][*next];
                *next += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let cid = members.len();
                    let mut group = Vec::new();
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        component[w] = cid;
                        group.push(w);
                        if w == v {
                            break;
                        }
                    }
                    members.push(group);
                }
            }
        }
    }
    (component, members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Assertion, Axiom};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://example.org/t#{s}")).unwrap()
    }

    #[test]
    fn chain_and_reflexivity() {
        let mut kb = KnowledgeBase::new();
        kb.add_axiom(Axiom::sub_class_of(iri("AutonomousRobot"), iri("Robot")));
        kb.add_axiom(Axiom::sub_class_of(iri("Robot"), iri("Device")));
        assert!(kb.is_subclass_of(&iri("AutonomousRobot"), &iri("Device")).unwrap());
        assert!(!kb.is_subclass_of(&iri("Device"), &iri("Robot")).unwrap());
        for c in ["AutonomousRobot", "Robot", "Device"] {
            assert!(kb.is_subclass_of(&iri(c), &iri(c)).unwrap());
        }
    }

    #[test]
    fn subclass_cycle_collapses_into_equivalence() {
        let mut kb = KnowledgeBase::new();
        kb.add_axiom(Axiom::sub_class_of(iri("A"), iri("B")));
        kb.add_axiom(Axiom::sub_class_of(iri("B"), iri("C")));
        kb.add_axiom(Axiom::sub_class_of(iri("C"), iri("A")));
        kb.add_axiom(Axiom::sub_class_of(iri("C"), iri("D")));
        assert_eq!(
            kb.equivalence_class_of(&iri("B")).unwrap(),
            BTreeSet::from([iri("A"), iri("B"), iri("C")])
        );
        assert!(kb.is_subclass_of(&iri("A"), &iri("D")).unwrap());
    }

    #[test]
    fn equivalence_is_symmetric_and_transitive() {
        let mut kb = KnowledgeBase::new();
        kb.add_axiom(Axiom::equivalent_class(iri("Capability"), iri("ProcessOperator")));
        kb.add_axiom(Axiom::equivalent_class(iri("ProcessOperator"), iri("Function")));
        kb.add_axiom(Axiom::sub_class_of(iri("Fly"), iri("ProcessOperator")));
        assert!(kb.is_subclass_of(&iri("Fly"), &iri("Capability")).unwrap());
        assert!(kb.is_subclass_of(&iri("Function"), &iri("Capability")).unwrap());
        assert_eq!(kb.equivalence_class_of(&iri("Function")).unwrap().len(), 3);
        kb.declare(&iri("Lonely"), TermKind::Class);
        assert_eq!(
            kb.equivalence_class_of(&iri("Lonely")).unwrap(),
            BTreeSet::from([iri("Lonely")])
        );
    }

    #[test]
    fn existential_classification_reaches_fixpoint() {
        let mut kb = KnowledgeBase::new();
        // ∃consistsOf.Platform ⊑ AutonomousRobot, ∃carries.AutonomousRobot ⊑ Carrier
        kb.add_axiom(Axiom::existential(iri("AutonomousRobot"), iri("consistsOf"), iri("Platform")));
        kb.add_axiom(Axiom::existential(iri("Carrier"), iri("carries"), iri("AutonomousRobot")));
        kb.add_axiom(Axiom::sub_class_of(iri("AutonomousRobot"), iri("Robot")));
        kb.add_axiom(Axiom::sub_class_of(iri("Wheelbase"), iri("Platform")));
        kb.assert(Assertion::typed(&iri("base1"), &iri("Wheelbase")));
        kb.assert(Assertion::link(&iri("ship"), &iri("carries"), &iri("rover")));
        kb.assert(Assertion::link(&iri("rover"), &iri("consistsOf"), &iri("base1")));
        let robots = kb.instances_of(&iri("Robot")).unwrap();
        assert_eq!(robots, BTreeSet::from([iri("rover")]));
        assert!(kb.is_instance_of(&iri("ship"), &iri("Carrier")));
    }

    #[test]
    fn subproperty_links_count_for_restrictions() {
        let mut kb = KnowledgeBase::new();
        kb.add_axiom(Axiom::existential(iri("AutonomousRobot"), iri("consistsOf"), iri("Platform")));
        kb.add_axiom(Axiom::sub_property_of(iri("hasChassis"), iri("consistsOf")));
        kb.assert(Assertion::typed(&iri("p"), &iri("Platform")));
        kb.assert(Assertion::link(&iri("r"), &iri("hasChassis"), &iri("p")));
        assert!(kb.is_instance_of(&iri("r"), &iri("AutonomousRobot")));
        assert!(kb.is_subproperty_of(&iri("hasChassis"), &iri("consistsOf")).unwrap());
    }

    #[test]
    fn tarjan_orders_sinks_first() {
        let edges = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let (component, members) = strongly_connected(&edges);
        assert_eq!(members.len(), 3);
        assert!(component[3] < component[1]);
        assert!(component[1] < component[0]);
        assert_eq!(component[1], component[2]);
    }
}
