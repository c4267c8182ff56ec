#![allow(dead_code)]

use std::sync::Arc;
use std::time::Duration;

use aurcap_core::capability::{define_capability, provides_capability, CapabilityDescription};
use aurcap_core::runtime::{Behavior, BehaviorError, ExecutionContext, Skill, SkillRuntime, SkillSpec};
use aurcap_core::seed::seed_with_properties;
use aurcap_core::vocab::{aur, aur_cap, aur_prop};
use aurcap_core::{Assertion, Iri, KnowledgeBase};

pub fn fx(local: &str) -> Iri {
    Iri::new(format!("https://example.org/net#{local}")).unwrap()
}

pub fn quick(ms: u64) -> Arc<dyn Behavior> {
    Arc::new(move |ctx: &ExecutionContext| ctx.sleep(Duration::from_millis(ms)))
}

pub fn failing(ms: u64) -> Arc<dyn Behavior> {
    Arc::new(move |ctx: &ExecutionContext| {
        ctx.sleep(Duration::from_millis(ms))?;
        Err(BehaviorError::Failed("gripper jammed".into()))
    })
}

pub fn endless() -> Arc<dyn Behavior> {
    Arc::new(|ctx: &ExecutionContext| loop {
        ctx.sleep(Duration::from_secs(60))?;
    })
}

/// Knowledge base with robot `r{i}` providing capability `c{i}` of type Fly.
pub fn kb_with_robots(n: usize) -> KnowledgeBase {
    let mut kb = seed_with_properties().unwrap();
    for i in 0..n {
        let (r, c) = (fx(&format!("r{i}")), fx(&format!("c{i}")));
        kb.assert(Assertion::typed(&r, &aur::ROBOT));
        define_capability(&mut kb, &CapabilityDescription::new(c.clone(), aur_cap::FLY.clone())).unwrap();
        provides_capability(&mut kb, &r, &c).unwrap();
    }
    kb
}

pub fn register(rt: &SkillRuntime, kb: &mut KnowledgeBase, i: usize, name: &str, behavior: Arc<dyn Behavior>) -> Arc<Skill> {
    let spec = SkillSpec::new(fx(name), fx(&format!("c{i}")), fx(&format!("r{i}"))).accepts(aur_prop::TARGET_ALTITUDE.clone());
    rt.register(kb, spec, behavior).unwrap()
}
