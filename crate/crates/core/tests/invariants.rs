use std::collections::{BTreeMap, BTreeSet};

use aurcap_core::capability::{capabilities_of_type, define_capability, CapabilityDescription};
use aurcap_core::property::{attach, satisfies, Expression, InstanceDescription, Role};
use aurcap_core::seed::{seed_kb, seed_with_properties};
use aurcap_core::structure::{register_robot, registered_robots, robots_by_modality, Modality, RobotDescription};
use aurcap_core::vocab::{aur, aur_cap, aur_prop, vdi3682};
use aurcap_core::{parse_turtle, serialize_turtle, Assertion, Axiom, Datatype, Iri, KnowledgeBase, Literal};
use proptest::prelude::*;

fn term(kind: &str, i: usize) -> Iri {
    Iri::new(format!("https://example.org/t#{kind}{i}")).unwrap()
}

fn taxonomy() -> impl Strategy<Value = (usize, Vec<(usize, usize, bool)>)> {
    (2usize..20).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n, prop::bool::weighted(0.2)), 0..40)))
}

fn build(n: usize, axioms: &[(usize, usize, bool)]) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    for i in 0..n {
        kb.declare(&term("C", i), aurcap_core::TermKind::Class);
    }
    for &(a, b, eq) in axioms {
        let axiom = if eq {
            Axiom::equivalent_class(term("C", a), term("C", b))
        } else {
            Axiom::sub_class_of(term("C", a), term("C", b))
        };
        kb.add_axiom(axiom);
    }
    kb
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subsumption_is_a_preorder((n, axioms) in taxonomy()) {
        let kb = build(n, &axioms);
        let sub = |a: usize, b: usize| kb.is_subclass_of(&term("C", a), &term("C", b)).unwrap();
        for a in 0..n {
            prop_assert!(sub(a, a));
            for b in 0..n {
                for c in 0..n {
                    if sub(a, b) && sub(b, c) {
                        prop_assert!(sub(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn equivalence_classes_partition((n, axioms) in taxonomy()) {
        let kb = build(n, &axioms);
        let mut seen: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for a in 0..n {
            let class = kb.equivalence_class_of(&term("C", a)).unwrap();
            prop_assert!(class.contains(&term("C", a)));
            for member in &class {
                if let Some(other) = seen.get(member) {
                    prop_assert_eq!(other, &class);
                }
                seen.insert(member.clone(), class.clone());
            }
        }
    }

    #[test]
    fn membership_is_monotone_along_subsumption((n, axioms) in taxonomy(), typed in prop::collection::vec(0usize..20, 1..10)) {
        let mut kb = build(n, &axioms);
        for (i, c) in typed.iter().enumerate() {
            kb.assert(Assertion::typed(&term("i", i), &term("C", c % n)));
        }
        for a in 0..n {
            for b in 0..n {
                if kb.is_subclass_of(&term("C", a), &term("C", b)).unwrap() {
                    let lower = kb.instances_of(&term("C", a)).unwrap();
                    let upper = kb.instances_of(&term("C", b)).unwrap();
                    prop_assert!(lower.is_subset(&upper));
                }
            }
        }
    }
}

fn dec(v: i64) -> Literal {
    Literal::new(v.to_string(), Datatype::Decimal).unwrap()
}

fn expression() -> impl Strategy<Value = Expression> {
    prop_oneof![
        (-10i64..=10).prop_map(|v| Expression::Equals(dec(v))),
        (-10i64..=10).prop_map(|v| Expression::LessOrEqual(dec(v))),
        (-10i64..=10).prop_map(|v| Expression::GreaterOrEqual(dec(v))),
        (-10i64..=10, 0i64..=10).prop_map(|(lo, w)| Expression::Interval(dec(lo), dec(lo + w))),
    ]
}

fn inst(role: Role, expression: Expression) -> InstanceDescription {
    InstanceDescription::new(term("x", 0), aur_prop::MAX_ALTITUDE.clone(), role, expression)
}

/// Widens the value set of an expression.
fn widen(e: &Expression, by: i64) -> Expression {
    let v = |l: &Literal| l.lexical().parse::<i64>().unwrap();
    match e {
        Expression::Equals(x) => Expression::Interval(dec(v(x) - by), dec(v(x) + by)),
        Expression::LessOrEqual(x) => Expression::LessOrEqual(dec(v(x) + by)),
        Expression::GreaterOrEqual(x) => Expression::GreaterOrEqual(dec(v(x) - by)),
        Expression::Interval(lo, hi) => Expression::Interval(dec(v(lo) - by), dec(v(hi) + by)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn widening_an_assurance_never_breaks_satisfaction(req in expression(), offer in expression(), by in 0i64..5) {
        let r = inst(Role::Requirement, req);
        let before = satisfies(&r, &inst(Role::Assurance, offer.clone())).unwrap();
        let after = satisfies(&r, &inst(Role::Assurance, widen(&offer, by))).unwrap();
        prop_assert!(!before || after);
    }

    #[test]
    fn actual_point_meets_equal_requirement(v in -1000i64..1000) {
        let r = inst(Role::Requirement, Expression::Equals(dec(v)));
        prop_assert!(satisfies(&r, &inst(Role::Actual, Expression::Equals(dec(v)))).unwrap());
    }
}

#[test]
fn data_element_unique_across_roundtrip() {
    let mut kb = seed_with_properties().unwrap();
    let robot = term("R", 0);
    kb.assert(Assertion::typed(&robot, &aur::ROBOT));
    let td = aur_prop::MAX_ALTITUDE.clone();
    for (i, role) in [Role::Assurance, Role::Actual].into_iter().enumerate() {
        let d = InstanceDescription::new(term("inst", i), td.clone(), role, Expression::Equals(dec(5)));
        attach(&mut kb, &robot, &td, &d).unwrap();
    }
    let back = parse_turtle(&serialize_turtle(&kb)).unwrap();
    assert_eq!(back, kb);
    let elements = back.objects(&robot, &aurcap_core::vocab::iec::HAS_DATA_ELEMENT);
    assert_eq!(elements.len(), 1);
}

#[test]
fn capability_queries_follow_the_taxonomy() {
    let mut kb = seed_kb().unwrap();
    let leaves = [
        &*aur_cap::FLY,
        &*aur_cap::DRIVE,
        &*aur_cap::SWIM,
        &*aur_cap::GRASP,
        &*aur_cap::DETECT,
        &*aur_cap::SEND,
        &*aur_cap::TRANSPORT,
    ];
    for (i, t) in leaves.iter().enumerate() {
        define_capability(&mut kb, &CapabilityDescription::new(term("cap", i), (*t).clone())).unwrap();
    }
    let types: Vec<Iri> = kb
        .classes()
        .filter(|c| kb.is_subclass_of(c, &vdi3682::PROCESS_OPERATOR).unwrap())
        .cloned()
        .collect();
    for a in &types {
        for b in &types {
            if kb.is_subclass_of(a, b).unwrap() {
                let lower = capabilities_of_type(&kb, a).unwrap();
                let upper = capabilities_of_type(&kb, b).unwrap();
                assert!(lower.is_subset(&upper), "{a} {b}");
            }
        }
    }
    assert_eq!(capabilities_of_type(&kb, &vdi3682::PROCESS_OPERATOR).unwrap().len(), leaves.len());
    assert!(kb.is_subclass_of(&vdi3682::PROCESS, &aurcap_core::vocab::sumo::PROCESS).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn modalities_partition_registered_robots(ms in prop::collection::vec(0usize..3, 0..8)) {
        let mut kb = seed_kb().unwrap();
        for (i, m) in ms.iter().enumerate() {
            let desc = RobotDescription::new(term("robot", i), aur::ROBOT.clone(), Modality::ALL[*m]);
            register_robot(&mut kb, &desc).unwrap();
        }
        let all = registered_robots(&kb);
        let mut union = BTreeSet::new();
        for m in Modality::ALL {
            let part = robots_by_modality(&kb, m);
            prop_assert!(union.is_disjoint(&part));
            union.extend(part);
        }
        prop_assert_eq!(union, all);
    }
}
