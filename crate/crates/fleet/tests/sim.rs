mod common;

use std::time::Duration;

use aurcap_core::interface::{descriptors_of, Endpoint};
use aurcap_core::seed::seed_with_properties;
use aurcap_core::skill::SkillState;
use aurcap_fleet::sim::{fleet_iri, fleet_turtle};
use aurcap_fleet::{default_fleet, BehaviorRegistry, Node, RegistryConfig, Script, SimError};
use aurcap_net::wire::StateMessage;
use common::*;
use serde_json::Value;

#[tokio::test]
async fn boot_leaves_every_skill_idle_and_retained() {
    let b = boot().await;
    let fleet = b.node.fleet.as_ref().unwrap();
    assert_eq!(fleet.skills().len(), 6);
    assert_eq!(fleet.descriptors().len(), 12);
    for s in fleet.skills() {
        assert_eq!(s.state(), SkillState::Idle);
    }
    for d in fleet.descriptors() {
        if let Endpoint::Mqtt(e) = &d.endpoint {
            let retained = b.broker.retained(&e.state_topic).expect("retained state");
            let msg = StateMessage::parse(&retained).unwrap();
            assert_eq!(msg.state, SkillState::Idle);
            assert_eq!(&msg.skill, &d.skill);
        }
    }
    b.node.shutdown().await;
}

#[tokio::test]
async fn shutdown_clears_retained_state_and_descriptors() {
    let b = boot().await;
    let descriptors = b.node.fleet.as_ref().unwrap().descriptors().to_vec();
    let registry = b.node.registry.clone();
    b.node.shutdown().await;
    let kb = registry.kb().read();
    for d in &descriptors {
        if let Endpoint::Mqtt(e) = &d.endpoint {
            assert_eq!(b.broker.retained(&e.state_topic), None);
        }
        assert!(descriptors_of(&kb, &d.skill).unwrap().is_empty());
    }
}

#[tokio::test]
async fn scripted_failure_aborts_first_run_only() {
    let mut robots = default_fleet();
    robots[0].skills[0].script = Script::fail_at(30);
    let b = boot_fleet(&robots, None).await;
    let c = reqwest::Client::new();
    let run = |c: reqwest::Client, base: String| async move {
        let v: Value = c
            .post(format!("{base}/missions"))
            .body(read_fixture("transport-mission.ttl"))
            .send()
            .await
            .unwrap()
            .json()
            .await
            .unwrap();
        let id = v["id"].as_str().unwrap().to_string();
        c.post(format!("{base}/missions/{id}/execute")).send().await.unwrap();
        await_report(&c, &base, &id, Duration::from_secs(10)).await
    };

    let first = run(c.clone(), b.base.clone()).await;
    assert_eq!(first["report"]["status"], "Failed");
    assert_eq!(first["report"]["step"], "https://w3id.org/aur/missions/transport#navigate");
    let steps = first["report"]["steps"].as_array().unwrap();
    let last = steps[0]["trajectory"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["state"], "Aborted");
    assert!(steps[1..].iter().all(|s| s["status"] == "Skipped"), "{first}");
    let navigate = fleet_iri("Rover1-navigate-skill");
    let skill = b.node.fleet.as_ref().unwrap().skills().into_iter().find(|s| s.id() == &navigate).unwrap();
    assert_eq!(skill.state(), SkillState::Aborted);

    let second = run(c, b.base.clone()).await;
    assert_eq!(second["report"]["status"], "Succeeded", "{second}");
    b.node.shutdown().await;
}

#[tokio::test]
async fn unknown_behavior_fails_boot() {
    let mut robots = default_fleet();
    robots[1].skills[0].script.behavior = "teleport".into();
    let err = Node::boot(&RegistryConfig::default(), &robots, &BehaviorRegistry::standard()).await.err().unwrap();
    assert!(matches!(err, aurcap_fleet::BootError::Sim(SimError::UnknownBehavior(ref b)) if b == "teleport"), "{err}");
}

#[tokio::test]
async fn unreachable_broker_fails_boot() {
    let config = RegistryConfig {
        broker_uri: "mqtt://127.0.0.1:1".into(),
        ..RegistryConfig::default()
    };
    assert!(Node::boot(&config, &default_fleet(), &BehaviorRegistry::standard()).await.is_err());
}

#[test]
fn fleet_description_is_deterministic() {
    let base = seed_with_properties().unwrap();
    let a = fleet_turtle(&base, &default_fleet()).unwrap();
    let b = fleet_turtle(&base, &default_fleet()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, read_fixture("fleet.ttl"));
}

#[tokio::test]
async fn repeated_boots_plan_identically() {
    let mut plans = Vec::new();
    for _ in 0..3 {
        let b = boot().await;
        let (_, plan) = b.node.registry.submit(&read_fixture("transport-mission.ttl")).unwrap();
        plans.push(plan.assignments.iter().map(|a| (a.robot.clone(), a.skill.clone())).collect::<Vec<_>>());
        b.node.shutdown().await;
    }
    assert!(plans.windows(2).all(|w| w[0] == w[1]));
}
