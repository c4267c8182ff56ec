mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Duration;

use aurcap_core::interface::SkillInterfaceDescriptor;
use aurcap_core::planner::{Assignment, Plan};
use aurcap_core::runtime::{Behavior, SkillRuntime};
use aurcap_core::skill::SkillState;
use aurcap_net::executor::{ExecuteError, ExecutionStatus, Executor, StepStatus};
use aurcap_net::{bind_mqtt, BrokerRegistry, HttpSkillServer, InProcessBroker, MqttBinding, TransportRegistry};
use common::*;

struct Rig {
    rt: SkillRuntime,
    descriptors: Vec<SkillInterfaceDescriptor>,
    transports: Arc<TransportRegistry>,
    _bindings: Vec<MqttBinding>,
    _server: HttpSkillServer,
}

/// Skill `s{i}` on robot `r{i}`; even ones over MQTT, odd ones over HTTP.
async fn rig(behaviors: Vec<Arc<dyn Behavior>>) -> Rig {
    let mut kb = kb_with_robots(behaviors.len());
    let rt = SkillRuntime::new();
    let broker = InProcessBroker::new("inproc://exec");
    let brokers = BrokerRegistry::standard();
    brokers.insert(broker.clone()).await;
    let server = HttpSkillServer::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let mut descriptors = Vec::new();
    let mut bindings = Vec::new();
    for (i, b) in behaviors.into_iter().enumerate() {
        let skill = register(&rt, &mut kb, i, &format!("s{i}"), b);
        if i % 2 == 0 {
            let binding = bind_mqtt(skill, broker.clone()).await.unwrap();
            descriptors.push(binding.descriptor.clone());
            bindings.push(binding);
        } else {
            descriptors.push(server.bind_http(skill).unwrap());
        }
    }
    Rig {
        rt,
        descriptors,
        transports: Arc::new(TransportRegistry::standard(Arc::new(brokers))),
        _bindings: bindings,
        _server: server,
    }
}

fn plan(rig: &Rig, deps: &[&[usize]]) -> Plan {
    Plan {
        mission: fx("m"),
        assignments: deps
            .iter()
            .enumerate()
            .map(|(i, ds)| Assignment {
                step: fx(&format!("step{i}")),
                robot: fx(&format!("r{i}")),
                capability: fx(&format!("c{i}")),
                skill: fx(&format!("s{i}")),
                interface: rig.descriptors[i].clone(),
                depends_on: ds.iter().map(|d| fx(&format!("step{d}"))).collect::<BTreeSet<_>>(),
                parameters: Vec::new(),
            })
            .collect(),
    }
}

#[tokio::test]
async fn chain_succeeds_in_order() {
    let rig = rig(vec![quick(30), quick(30), quick(30)]).await;
    let p = plan(&rig, &[&[], &[0], &[1]]);
    let report = Executor::new(rig.transports.clone()).execute(&p).await.unwrap();
    assert_eq!(report.status, ExecutionStatus::Succeeded);
    for s in &report.steps {
        assert_eq!(s.status, StepStatus::Completed);
        assert_eq!(s.states().first(), Some(&SkillState::Idle));
        assert_eq!(s.states().last(), Some(&SkillState::Completed));
    }
    for w in report.steps.windows(2) {
        assert!(w[0].finished_at.unwrap() <= w[1].started_at.unwrap());
    }
    rig.rt.shutdown();
}

#[tokio::test]
async fn failure_aborts_in_flight_and_skips_dependents() {
    // step0 fails; step1 runs in parallel and is aborted; step2 waits on step0
    let rig = rig(vec![failing(100), endless(), quick(10)]).await;
    let p = plan(&rig, &[&[], &[], &[0]]);
    let report = Executor::new(rig.transports.clone()).execute(&p).await.unwrap();
    assert_eq!(
        report.status,
        ExecutionStatus::Failed {
            step: fx("step0"),
            reason: "gripper jammed".into()
        }
    );
    assert_eq!(report.steps[1].status, StepStatus::Failed);
    assert_eq!(report.steps[1].states().last(), Some(&SkillState::Aborted));
    assert_eq!(report.steps[2].status, StepStatus::Skipped);
    assert!(report.steps[2].trajectory.is_empty());
    rig.rt.shutdown();
}

#[tokio::test]
async fn completed_skills_are_reset_before_reuse() {
    let rig = rig(vec![quick(10)]).await;
    let p = plan(&rig, &[&[]]);
    let exec = Executor::new(rig.transports.clone());
    exec.execute(&p).await.unwrap();
    let second = exec.execute(&p).await.unwrap();
    assert!(second.succeeded());
    use SkillState::*;
    assert_eq!(second.steps[0].states()[..3], [Completed, Resetting, Idle]);
    rig.rt.shutdown();
}

#[tokio::test]
async fn concurrent_missions_cannot_share_a_skill() {
    let rig = rig(vec![quick(300)]).await;
    let p = plan(&rig, &[&[]]);
    let exec = Arc::new(Executor::new(rig.transports.clone()));
    let (e, q) = (exec.clone(), p.clone());
    let first = tokio::spawn(async move { e.execute(&q).await });
    tokio::time::sleep(Duration::from_millis(50)).await;
    assert_eq!(exec.execute(&p).await, Err(ExecuteError::SkillBusy(fx("s0"))));
    assert!(first.await.unwrap().unwrap().succeeded());
    rig.rt.shutdown();
}

#[tokio::test]
async fn silent_skill_times_out() {
    let rig = rig(vec![quick(10)]).await;
    let p = plan(&rig, &[&[]]);
    drop(rig._bindings);
    let exec = Executor::new(rig.transports.clone()).with_deadline(Duration::from_millis(300));
    assert_eq!(exec.execute(&p).await, Err(ExecuteError::InterfaceTimeout(fx("step0"))));
    rig.rt.shutdown();
}
