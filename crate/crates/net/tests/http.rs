mod common;

use std::sync::Arc;
use std::time::Duration;

use aurcap_core::interface::Endpoint;
use aurcap_core::runtime::SkillRuntime;
use aurcap_core::skill::{SkillState, TransitionCommand};
use aurcap_net::bind::BindError;
use aurcap_net::transport::{invoke_remote, InvokeError, TransportRegistry};
use aurcap_net::wire::{CommandMessage, StateMessage};
use aurcap_net::{BrokerRegistry, HttpSkillServer};
use common::*;

async fn setup() -> (SkillRuntime, HttpSkillServer, aurcap_core::interface::SkillInterfaceDescriptor) {
    let mut kb = kb_with_robots(1);
    let rt = SkillRuntime::new();
    let skill = register(&rt, &mut kb, 0, "fly", quick(150));
    let server = HttpSkillServer::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let d = server.bind_http(skill).unwrap();
    (rt, server, d)
}

fn url(d: &aurcap_core::interface::SkillInterfaceDescriptor) -> String {
    let Endpoint::Http(e) = &d.endpoint else { panic!() };
    e.skill_url()
}

#[tokio::test]
async fn transitions_and_state() {
    let (rt, _server, d) = setup().await;
    let client = reqwest::Client::new();
    let resp = client.post(format!("{}/transitions/start", url(&d))).send().await.unwrap();
    assert_eq!(resp.status(), 202);
    let msg: StateMessage = resp.json().await.unwrap();
    assert_eq!(msg.state, SkillState::Starting);
    let again = client.post(format!("{}/transitions/start", url(&d))).send().await.unwrap();
    assert_eq!(again.status(), 409);
    let state: StateMessage = client.get(format!("{}/state", url(&d))).send().await.unwrap().json().await.unwrap();
    assert_eq!(state.state, SkillState::Execute);
    let history: Vec<StateMessage> = client.get(format!("{}/state?after=0", url(&d))).send().await.unwrap().json().await.unwrap();
    assert_eq!(history.iter().map(|m| m.sequence).collect::<Vec<_>>(), vec![1, 2]);
    let bad = client.post(format!("{}/transitions/jump", url(&d))).send().await.unwrap();
    assert_eq!(bad.status(), 404);
    let mismatch = CommandMessage::new(TransitionCommand::Hold).canonical();
    let bad = client.post(format!("{}/transitions/stop", url(&d))).body(mismatch).send().await.unwrap();
    assert_eq!(bad.status(), 400);
    rt.shutdown();
}

#[tokio::test]
async fn description_lists_nine_resources() {
    let (rt, _server, d) = setup().await;
    let doc = reqwest::get(format!("{}/description", url(&d))).await.unwrap().text().await.unwrap();
    assert_eq!(doc.matches("<resource ").count(), 9);
    rt.shutdown();
}

#[tokio::test]
async fn invoke_through_polling() {
    let (rt, _server, d) = setup().await;
    let transports = TransportRegistry::standard(Arc::new(BrokerRegistry::standard()));
    let mut inv = invoke_remote(&transports, &d, CommandMessage::new(TransitionCommand::Start), Duration::from_secs(5))
        .await
        .unwrap();
    let mut states = vec![inv.before.state];
    loop {
        let m = inv.feed.next().await.unwrap();
        states.push(m.state);
        if m.state.is_terminal() {
            break;
        }
    }
    use SkillState::*;
    assert_eq!(states, vec![Idle, Starting, Execute, Completing, Completed]);
    let err = invoke_remote(&transports, &d, CommandMessage::new(TransitionCommand::Hold), Duration::from_secs(5))
        .await
        .err()
        .unwrap();
    assert!(matches!(err, InvokeError::Rejected(_)));
    rt.shutdown();
}

#[tokio::test]
async fn unreachable_endpoint_times_out() {
    let (rt, server, d) = setup().await;
    drop(server);
    tokio::time::sleep(Duration::from_millis(50)).await;
    let transports = TransportRegistry::standard(Arc::new(BrokerRegistry::standard()));
    let err = invoke_remote(&transports, &d, CommandMessage::new(TransitionCommand::Start), Duration::from_millis(400))
        .await
        .err()
        .unwrap();
    assert!(matches!(err, InvokeError::Timeout(_)));
    rt.shutdown();
}

#[tokio::test]
async fn occupied_port() {
    let first = HttpSkillServer::bind("127.0.0.1:0".parse().unwrap()).await.unwrap();
    let addr = first.base_url().trim_start_matches("http://").parse().unwrap();
    assert!(matches!(HttpSkillServer::bind(addr).await, Err(BindError::PortUnavailable { .. })));
}
