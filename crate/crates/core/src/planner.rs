//! Mission planning over capabilities. Pure: reads the knowledge base only.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::interface::SkillInterfaceDescriptor;
use crate::iri::Iri;
use crate::kb::KnowledgeBase;
use crate::matchmaker::{self, Match, MatchError};
use crate::mission::{Mission, MissionStep};
use crate::runtime::Parameter;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("mission dependencies form a cycle through {0:?}")]
    CyclicMission(Vec<Iri>),
    #[error("no robot can perform step {0}")]
    Unsatisfiable(Iri),
    #[error(transparent)]
    Match(#[from] MatchError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlannerConfig {
    /// Whether steps without a dependency path between them may share a robot.
    pub reusable: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { reusable: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assignment {
    pub step: Iri,
    pub robot: Iri,
    pub capability: Iri,
    pub skill: Iri,
    pub interface: SkillInterfaceDescriptor,
    pub depends_on: BTreeSet<Iri>,
    pub parameters: Vec<Parameter>,
}

/// Assignments in topological order.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub mission: Iri,
    pub assignments: Vec<Assignment>,
}

impl Plan {
    pub fn assignment(&self, step: &Iri) -> Option<&Assignment> {
        self.assignments.iter().find(|a| &a.step == step)
    }
}

/// Steps in dependency order; ties keep mission order.
pub fn topological_order(mission: &Mission) -> Result<Vec<&MissionStep>, PlanError> {
    let position: BTreeMap<&Iri, usize> = mission.steps.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
    let mut remaining: Vec<usize> = mission
        .steps
        .iter()
        .map(|s| s.depends_on.iter().filter(|d| position.contains_key(d)).count())
        .collect();
    let mut ready: BTreeSet<usize> = (0..mission.steps.len()).filter(|&i| remaining[i] == 0).collect();
    let mut order = Vec::with_capacity(mission.steps.len());
    while let Some(i) = ready.pop_first() {
        order.push(&mission.steps[i]);
        for (j, s) in mission.steps.iter().enumerate() {
            if s.depends_on.contains(&mission.steps[i].id) {
                remaining[j] -= 1;
                if remaining[j] == 0 {
                    ready.insert(j);
                }
            }
        }
    }
    if order.len() < mission.steps.len() {
        let stuck = (0..mission.steps.len())
            .filter(|&i| remaining[i] > 0)
            .map(|i| mission.steps[i].id.clone())
            .collect();
        return Err(PlanError::CyclicMission(stuck));
    }
    Ok(order)
}

/// Pairs of steps connected by a dependency path, in either direction.
fn ordered_pairs(order: &[&MissionStep]) -> BTreeSet<(Iri, Iri)> {
    let mut ancestors: BTreeMap<&Iri, BTreeSet<Iri>> = BTreeMap::new();
    for step in order {
        let mut set = BTreeSet::new();
        for dep in &step.depends_on {
            set.insert(dep.clone());
            if let Some(up) = ancestors.get(dep) {
                set.extend(up.iter().cloned());
            }
        }
        ancestors.insert(&step.id, set);
    }
    let mut pairs = BTreeSet::new();
    for (step, ups) in ancestors {
        for up in ups {
            pairs.insert((step.clone(), up.clone()));
            pairs.insert((up, step.clone()));
        }
    }
    pairs
}

/// Plans `mission`: each step takes its best-ranked match.
///
/// Without reuse, two steps with no dependency path between them may not
/// share a robot. A blocked step first tries its lower-ranked matches, then
/// tries moving one conflicting earlier step to its next alternative.
pub fn plan(kb: &KnowledgeBase, mission: &Mission, config: PlannerConfig) -> Result<Plan, PlanError> {
    let order = topological_order(mission)?;
    let related = ordered_pairs(&order);
    let conflicts = |a: &Iri, b: &Iri, robot_a: &Iri, robot_b: &Iri| {
        !config.reusable && robot_a == robot_b && a != b && !related.contains(&(a.clone(), b.clone()))
    };

    let mut candidates: Vec<Vec<Match>> = Vec::with_capacity(order.len());
    let mut chosen: Vec<usize> = Vec::with_capacity(order.len());
    for (pos, step) in order.iter().enumerate() {
        let matches = matchmaker::match_capability(kb, &step.required)?;
        if matches.is_empty() {
            return Err(PlanError::Unsatisfiable(step.id.clone()));
        }
        let free = |k: usize, chosen: &[usize], candidates: &[Vec<Match>], skip: Option<usize>| {
            let robot = &matches[k].robot;
            (0..pos).filter(|&e| Some(e) != skip).all(|e| {
                !conflicts(&step.id, &order[e].id, robot, &candidates[e][chosen[e]].robot)
            })
        };
        if let Some(k) = (0..matches.len()).find(|&k| free(k, &chosen, &candidates, None)) {
            candidates.push(matches);
            chosen.push(k);
            continue;
        }
        // single-level backtracking: move one earlier step out of the way
        let mut repaired = None;
        'outer: for k in 0..matches.len() {
            for e in 0..pos {
                if !conflicts(&step.id, &order[e].id, &matches[k].robot, &candidates[e][chosen[e]].robot) {
                    continue;
                }
                if !free(k, &chosen, &candidates, Some(e)) {
                    continue;
                }
                for alt in 0..candidates[e].len() {
                    if alt == chosen[e] {
                        continue;
                    }
                    let alt_robot = &candidates[e][alt].robot;
                    let clash_new = conflicts(&order[e].id, &step.id, alt_robot, &matches[k].robot);
                    let clash_old = (0..pos).filter(|&o| o != e).any(|o| {
                        conflicts(&order[e].id, &order[o].id, alt_robot, &candidates[o][chosen[o]].robot)
                    });
                    if !clash_new && !clash_old {
                        repaired = Some((k, e, alt));
                        break 'outer;
                    }
                }
            }
        }
        match repaired {
            Some((k, e, alt)) => {
                chosen[e] = alt;
                candidates.push(matches);
                chosen.push(k);
            }
            None => return Err(PlanError::Unsatisfiable(step.id.clone())),
        }
    }

    let assignments = order
        .iter()
        .zip(candidates.iter().zip(&chosen))
        .map(|(step, (matches, &k))| {
            let m = &matches[k];
            Assignment {
                step: step.id.clone(),
                robot: m.robot.clone(),
                capability: m.capability.clone(),
                skill: m.skill.clone(),
                interface: m.interfaces[0].clone(),
                depends_on: step.depends_on.clone(),
                parameters: step.parameters.clone(),
            }
        })
        .collect();
    Ok(Plan {
        mission: mission.id.clone(),
        assignments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matchmaker::RequiredCapability;

    fn fx(local: &str) -> Iri {
        Iri::new(format!("https://example.org/m#{local}")).unwrap()
    }

    fn step(id: &str, index: i64, deps: &[&str]) -> MissionStep {
        MissionStep {
            id: fx(id),
            index,
            required: RequiredCapability::new(fx("T")),
            depends_on: deps.iter().map(|d| fx(d)).collect(),
            parameters: Vec::new(),
        }
    }

    #[test]
    fn topological_ties_keep_mission_order() {
        let mission = Mission {
            id: fx("m"),
            steps: vec![step("c", 1, &["b"]), step("a", 2, &[]), step("b", 3, &["a"])],
        };
        let order: Vec<_> = topological_order(&mission).unwrap().iter().map(|s| s.id.clone()).collect();
        assert_eq!(order, vec![fx("a"), fx("b"), fx("c")]);
    }

    #[test]
    fn cycle_detected() {
        let mission = Mission {
            id: fx("m"),
            steps: vec![step("a", 1, &["b"]), step("b", 2, &["a"]), step("c", 3, &[])],
        };
        assert_eq!(
            topological_order(&mission).map(|_| ()),
            Err(PlanError::CyclicMission(vec![fx("a"), fx("b")]))
        );
    }

    #[test]
    fn empty_mission_plans_empty() {
        let kb = KnowledgeBase::new();
        let p = plan(&kb, &Mission::empty(fx("m")), PlannerConfig::default()).unwrap();
        assert!(p.assignments.is_empty());
    }
}
