//! Simulated robots hosting scripted skills.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use aurcap_core::capability::{define_capability, provides_capability, CapabilityDescription, CapabilityError, IoKind};
use aurcap_core::interface::{record_descriptor, remove_descriptor, SkillInterfaceDescriptor};
use aurcap_core::property::{attach, Expression, InstanceDescription, PropertyError, Role};
use aurcap_core::runtime::{Behavior, BehaviorError, ExecutionContext, Skill, SkillError, SkillRuntime, SkillSpec};
use aurcap_core::skill::SkillState;
use aurcap_core::structure::{register_robot, Modality, Pose, Quaternion, RobotDescription, StructureError};
use aurcap_core::vocab::{aur, aur_cap, aur_frame, aur_prop};
use aurcap_core::{Iri, KnowledgeBase, Literal};
use aurcap_net::{bind_mqtt, BindError, Broker, HttpSkillServer, MqttBinding};
use parking_lot::RwLock;
use thiserror::Error;

pub const FLEET_NS: &str = "https://w3id.org/aur/fleet#";

pub fn fleet_iri(local: &str) -> Iri {
    Iri::new(format!("{FLEET_NS}{local}")).expect("fleet names are valid")
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("no behavior named `{0}`")]
    UnknownBehavior(String),
    #[error("broker {0} unreachable")]
    BrokerUnreachable(String),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error(transparent)]
    Property(#[from] PropertyError),
    #[error(transparent)]
    Skill(#[from] SkillError),
    #[error(transparent)]
    Bind(#[from] BindError),
}

/// Scripted skill body: which behavior to run and its timing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub behavior: String,
    pub duration: Duration,
    pub fail_at: Option<Duration>,
}

impl Script {
    pub fn complete(ms: u64) -> Self {
        Script {
            behavior: "complete".into(),
            duration: Duration::from_millis(ms),
            fail_at: None,
        }
    }

    pub fn fail_at(ms: u64) -> Self {
        Script {
            behavior: "fail-at".into(),
            duration: Duration::from_millis(ms),
            fail_at: Some(Duration::from_millis(ms)),
        }
    }

    pub fn honor_suspend(ms: u64) -> Self {
        Script {
            behavior: "honor-suspend".into(),
            duration: Duration::from_millis(ms),
            fail_at: None,
        }
    }
}

pub trait BehaviorFactory: Send + Sync {
    fn build(&self, script: &Script) -> Arc<dyn Behavior>;
}

impl<F> BehaviorFactory for F
where
    F: Fn(&Script) -> Arc<dyn Behavior> + Send + Sync,
{
    fn build(&self, script: &Script) -> Arc<dyn Behavior> {
        self(script)
    }
}

/// Behaviors by name.
#[derive(Clone, Default)]
pub struct BehaviorRegistry {
    factories: HashMap<String, Arc<dyn BehaviorFactory>>,
}

/// States in which a wall-clock body keeps running.
fn still_running(state: SkillState) -> bool {
    use SkillState::*;
    matches!(state, Execute | Holding | Held | Unholding | Suspending | Suspended | Unsuspending)
}

fn wall_clock(ctx: &ExecutionContext, d: Duration) -> Result<(), BehaviorError> {
    let until = Instant::now() + d;
    while Instant::now() < until {
        if !still_running(ctx.state()) {
            return Err(BehaviorError::Interrupted);
        }
        std::thread::sleep(Duration::from_millis(5).min(until.saturating_duration_since(Instant::now())));
    }
    Ok(())
}

impl BehaviorRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `complete` runs for its duration in wall-clock time, pauses or not; `honor-suspend`
    /// counts only executing time; `fail-at` fails its first run after the given time.
    pub fn standard() -> Self {
        let mut r = BehaviorRegistry::empty();
        r.register(
            "complete",
            Arc::new(|s: &Script| -> Arc<dyn Behavior> {
                let d = s.duration;
                Arc::new(move |ctx: &ExecutionContext| wall_clock(ctx, d))
            }),
        );
        r.register(
            "honor-suspend",
            Arc::new(|s: &Script| -> Arc<dyn Behavior> {
                let d = s.duration;
                Arc::new(move |ctx: &ExecutionContext| ctx.sleep(d))
            }),
        );
        r.register(
            "fail-at",
            Arc::new(|s: &Script| -> Arc<dyn Behavior> {
                let (at, d) = (s.fail_at.unwrap_or(s.duration), s.duration);
                let failed = Arc::new(AtomicBool::new(false));
                Arc::new(move |ctx: &ExecutionContext| {
                    if failed.load(Ordering::SeqCst) {
                        return ctx.sleep(d);
                    }
                    ctx.sleep(at)?;
                    failed.store(true, Ordering::SeqCst);
                    Err(BehaviorError::Failed(format!("scripted failure after {} ms", at.as_millis())))
                })
            }),
        );
        r
    }

    pub fn register(&mut self, name: &str, factory: Arc<dyn BehaviorFactory>) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn build(&self, script: &Script) -> Result<Arc<dyn Behavior>, SimError> {
        self.factories
            .get(&script.behavior)
            .map(|f| f.build(script))
            .ok_or_else(|| SimError::UnknownBehavior(script.behavior.clone()))
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedSkill {
    pub id: Iri,
    pub capability: CapabilityDescription,
    /// Accepted start parameter types.
    pub parameters: Vec<Iri>,
    pub script: Script,
}

#[derive(Clone, Debug)]
pub struct SimulatedRobot {
    pub description: RobotDescription,
    /// Assurances and actuals attached to the robot.
    pub offers: Vec<InstanceDescription>,
    pub skills: Vec<SimulatedSkill>,
}

fn decimal(v: f64) -> Literal {
    Literal::decimal_f64(v).expect("finite")
}

fn skill(robot: &str, name: &str, capability: CapabilityDescription, script: Script) -> SimulatedSkill {
    SimulatedSkill {
        id: fleet_iri(&format!("{robot}-{name}-skill")),
        capability,
        parameters: Vec::new(),
        script,
    }
}

fn cap(robot: &str, name: &str, t: &Iri) -> CapabilityDescription {
    CapabilityDescription::new(fleet_iri(&format!("{robot}-{name}")), t.clone())
}

fn altitude_assurance(robot: &str, max: f64) -> InstanceDescription {
    InstanceDescription::new(
        fleet_iri(&format!("{robot}-altitude-assurance")),
        aur_prop::MAX_ALTITUDE.clone(),
        Role::Assurance,
        Expression::LessOrEqual(decimal(max)),
    )
}

fn robot(name: &str, modality: Modality, x: f64, parts: &[(&str, &Iri)]) -> RobotDescription {
    let pose = Pose::new([x, 0.0, 0.0], Quaternion::IDENTITY, aur_frame::WORLD.clone()).expect("unit quaternion");
    parts.iter().fold(
        RobotDescription::new(fleet_iri(name), aur::AUTONOMOUS_ROBOT.clone(), modality).with_pose(pose),
        |d, (part, class)| d.with_part(fleet_iri(&format!("{name}-{part}")), (*class).clone()),
    )
}

/// Rover1 (ground: navigate, grasp, release), Quadrocopter1 (air: fly, release; altitude ≤ 120 m)
/// and Hexacopter2 (air: fly; altitude ≤ 100 m). Every skill completes after a short run.
pub fn default_fleet() -> Vec<SimulatedRobot> {
    use IoKind::{Information, Product};
    let fly = |r: &str| {
        let mut s = skill(
            r,
            "fly",
            cap(r, "fly", &aur_cap::FLY)
                .input(Product, "parcel held")
                .input(Information, "target altitude")
                .output(Product, "parcel at destination"),
            Script::complete(200),
        );
        s.parameters.push(aur_prop::TARGET_ALTITUDE.clone());
        s
    };
    let release = |r: &str| {
        skill(
            r,
            "release",
            cap(r, "release", &aur_cap::RELEASE)
                .input(Product, "parcel held")
                .output(Product, "parcel placed"),
            Script::complete(100),
        )
    };
    vec![
        SimulatedRobot {
            description: robot("Rover1", Modality::Ground, 0.0, &[("platform", &aur::PLATFORM), ("gripper", &aur::ACTUATOR), ("lidar", &aur::SENSOR)]),
            offers: Vec::new(),
            skills: vec![
                skill(
                    "Rover1",
                    "navigate",
                    cap("Rover1", "navigate", &aur_cap::NAVIGATE)
                        .input(Information, "goal pose")
                        .output(Information, "reached pose"),
                    Script::complete(200),
                ),
                skill(
                    "Rover1",
                    "grasp",
                    cap("Rover1", "grasp", &aur_cap::GRASP)
                        .input(Product, "parcel on ground")
                        .output(Product, "parcel held"),
                    Script::complete(100),
                ),
                release("Rover1"),
            ],
        },
        SimulatedRobot {
            description: robot("Quadrocopter1", Modality::Air, 5.0, &[("platform", &aur::PLATFORM), ("winch", &aur::ACTUATOR)]),
            offers: vec![altitude_assurance("Quadrocopter1", 120.0)],
            skills: vec![fly("Quadrocopter1"), release("Quadrocopter1")],
        },
        SimulatedRobot {
            description: robot("Hexacopter2", Modality::Air, 10.0, &[("platform", &aur::PLATFORM), ("camera", &aur::SENSOR)]),
            offers: vec![altitude_assurance("Hexacopter2", 100.0)],
            skills: vec![fly("Hexacopter2")],
        },
    ]
}

/// Registers structure, offers and capabilities of `robots`; no skills, no network.
pub fn describe_fleet(kb: &mut KnowledgeBase, robots: &[SimulatedRobot]) -> Result<(), SimError> {
    kb.bind_prefix("fleet", FLEET_NS);
    for r in robots {
        register_robot(kb, &r.description)?;
        for offer in &r.offers {
            attach(kb, &r.description.id, &offer.type_description, offer)?;
        }
        for s in &r.skills {
            define_capability(kb, &s.capability)?;
            provides_capability(kb, &r.description.id, &s.capability.id)?;
        }
    }
    Ok(())
}

/// Turtle holding exactly what [`describe_fleet`] adds to `base`.
pub fn fleet_turtle(base: &KnowledgeBase, robots: &[SimulatedRobot]) -> Result<String, SimError> {
    let mut full = base.clone();
    describe_fleet(&mut full, robots)?;
    let mut delta = KnowledgeBase::with_model_prefixes();
    delta.bind_prefix("fleet", FLEET_NS);
    for (iri, kind) in full.vocabulary() {
        if base.term_kind(iri).is_none() {
            delta.declare(iri, *kind);
        }
    }
    for a in full.axioms().filter(|a| !base.contains_axiom(a)) {
        delta.add_axiom(a.clone());
    }
    for a in full.assertions().filter(|a| !base.contains_assertion(a)) {
        delta.assert(a);
    }
    Ok(aurcap_core::serialize_turtle(&delta))
}

/// Confirms the broker delivers a round trip.
pub async fn probe(broker: &Arc<dyn Broker>) -> Result<(), SimError> {
    let unreachable = || SimError::BrokerUnreachable(broker.uri().to_string());
    let topic = format!("aur/probe/{}", uuid::Uuid::new_v4().simple());
    let mut rx = broker.subscribe(&topic).await.map_err(|_| unreachable())?;
    broker.publish(&topic, b"ping".to_vec(), false).await.map_err(|_| unreachable())?;
    tokio::time::timeout(Duration::from_secs(3), rx.recv())
        .await
        .ok()
        .flatten()
        .map(|_| ())
        .ok_or_else(unreachable)
}

/// A running simulated fleet.
pub struct FleetHandle {
    pub runtime: SkillRuntime,
    pub http: HttpSkillServer,
    bindings: Vec<MqttBinding>,
    descriptors: Vec<SkillInterfaceDescriptor>,
}

impl FleetHandle {
    pub fn skills(&self) -> Vec<Arc<Skill>> {
        self.runtime.skills()
    }

    pub fn descriptors(&self) -> &[SkillInterfaceDescriptor] {
        &self.descriptors
    }

    /// Closes every interface, clears retained state and withdraws descriptors from `kb`.
    pub async fn shutdown(self, kb: &RwLock<KnowledgeBase>) {
        for b in self.bindings {
            if let Err(e) = b.unbind().await {
                tracing::warn!(error = %e, "clearing retained state failed");
            }
        }
        {
            let mut kb = kb.write();
            for d in &self.descriptors {
                remove_descriptor(&mut kb, d);
            }
        }
        self.runtime.shutdown();
        drop(self.http);
    }
}

/// Registers `robots` in `kb`, hosts their skills and binds each over MQTT and HTTP.
pub async fn simulate_fleet(
    kb: &RwLock<KnowledgeBase>,
    robots: &[SimulatedRobot],
    behaviors: &BehaviorRegistry,
    broker: Arc<dyn Broker>,
    http: HttpSkillServer,
) -> Result<FleetHandle, SimError> {
    probe(&broker).await?;
    let runtime = SkillRuntime::new();
    let mut hosted = Vec::new();
    {
        let mut kb = kb.write();
        describe_fleet(&mut kb, robots)?;
        for r in robots {
            for s in &r.skills {
                let spec = s
                    .parameters
                    .iter()
                    .fold(SkillSpec::new(s.id.clone(), s.capability.id.clone(), r.description.id.clone()), |spec, p| {
                        spec.accepts(p.clone())
                    });
                hosted.push(runtime.register(&mut kb, spec, behaviors.build(&s.script)?)?);
            }
        }
    }
    let mut bindings = Vec::new();
    let mut descriptors = Vec::new();
    for skill in hosted {
        let binding = bind_mqtt(skill.clone(), broker.clone()).await?;
        descriptors.push(binding.descriptor.clone());
        bindings.push(binding);
        descriptors.push(http.bind_http(skill)?);
    }
    {
        let mut kb = kb.write();
        for d in &descriptors {
            record_descriptor(&mut kb, d);
        }
    }
    Ok(FleetHandle {
        runtime,
        http,
        bindings,
        descriptors,
    })
}

/// Registers `robots` and their skills with the descriptors they would get when
/// bound to `broker_uri` and `http_base`, without opening anything.
pub fn describe_fleet_offline(
    kb: &mut KnowledgeBase,
    robots: &[SimulatedRobot],
    behaviors: &BehaviorRegistry,
    broker_uri: &str,
    http_base: &str,
) -> Result<SkillRuntime, SimError> {
    use aurcap_core::interface::{Endpoint, HttpEndpoint, InterfaceError, InterfaceKind, MqttEndpoint};
    describe_fleet(kb, robots)?;
    let runtime = SkillRuntime::new();
    let interface = |e: InterfaceError| SimError::Bind(BindError::Interface(e));
    for r in robots {
        for s in &r.skills {
            let spec = s
                .parameters
                .iter()
                .fold(SkillSpec::new(s.id.clone(), s.capability.id.clone(), r.description.id.clone()), |spec, p| {
                    spec.accepts(p.clone())
                });
            runtime.register(kb, spec, behaviors.build(&s.script)?)?;
            let mqtt = MqttEndpoint::for_skill(broker_uri, &r.description.id, &s.id).map_err(interface)?;
            let http = HttpEndpoint::for_skill(http_base, &s.id).map_err(interface)?;
            for (kind, endpoint) in [(InterfaceKind::Mqtt, Endpoint::Mqtt(mqtt)), (InterfaceKind::Http, Endpoint::Http(http))] {
                let id = SkillInterfaceDescriptor::default_id(&s.id, kind).map_err(|e| interface(e.into()))?;
                record_descriptor(
                    kb,
                    &SkillInterfaceDescriptor {
                        id,
                        skill: s.id.clone(),
                        endpoint,
                    },
                );
            }
        }
    }
    Ok(runtime)
}
