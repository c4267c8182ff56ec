//! Skill runtime: registered skills, their state machines and behavior bodies.
//!
//! Commands on one skill are applied one at a time under the skill's lock.
//! Automatic edges fire right after the command edge, inside the same
//! critical section, so observers see every intermediate state in order.
//! Behavior bodies run on their own threads and cooperate through
//! [`ExecutionContext`] checkpoints.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::sync::{Arc, Weak};
use std::thread;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use parking_lot::{Condvar, Mutex, MutexGuard, RwLock};
use thiserror::Error;
use tokio::sync::mpsc;

use crate::capability;
use crate::iri::Iri;
use crate::kb::{Assertion, KnowledgeBase};
use crate::literal::{Datatype, Literal};
use crate::property::{self, PropertyError};
use crate::skill::{SkillState, TransitionCommand};
use crate::vocab::{cask, vdi3682};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SkillError {
    #[error("unknown skill {0}")]
    UnknownSkill(Iri),
    #[error("skill {0} is already registered")]
    DuplicateSkill(Iri),
    #[error("unknown capability {0}")]
    UnknownCapability(Iri),
    #[error("{host} does not provide {capability}")]
    CapabilityNotProvidedByHost { host: Iri, capability: Iri },
    #[error(transparent)]
    Property(#[from] PropertyError),
}

/// Typed start parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameter {
    pub type_description: Iri,
    pub value: Literal,
}

impl Parameter {
    pub fn new(type_description: Iri, value: Literal) -> Self {
        Parameter {
            type_description,
            value,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub kind: TransitionCommand,
    pub parameters: Vec<Parameter>,
    pub correlation_id: Option<String>,
}

impl Command {
    pub fn new(kind: TransitionCommand) -> Self {
        Command {
            kind,
            parameters: Vec::new(),
            correlation_id: None,
        }
    }

    pub fn with_parameters(mut self, parameters: Vec<Parameter>) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn correlated(mut self, id: impl Into<String>) -> Self {
        self.correlation_id = Some(id.into());
        self
    }
}

/// One state change of one skill.
#[derive(Clone, Debug, PartialEq)]
pub struct StateEvent {
    pub skill: Iri,
    pub state: SkillState,
    pub sequence: u64,
    pub correlation_id: Option<String>,
    pub at: DateTime<Utc>,
    /// Failure detail, set on the Aborting/Aborted pair caused by a body failure.
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommandOutcome {
    /// Applied; carries the state entered by the command edge.
    Accepted(StateEvent),
    Rejected { reason: String, state: SkillState },
    /// Correlation id seen before; acknowledged without effect.
    Duplicate(StateEvent),
}

impl CommandOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, CommandOutcome::Accepted(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BehaviorError {
    /// A hold/suspend/stop/abort or shutdown cut the body short.
    #[error("interrupted")]
    Interrupted,
    #[error("{0}")]
    Failed(String),
}

/// Caller-supplied skill body, invoked on entry to Execute.
pub trait Behavior: Send + Sync {
    fn run(&self, ctx: &ExecutionContext) -> Result<(), BehaviorError>;
}

impl<F> Behavior for F
where
    F: Fn(&ExecutionContext) -> Result<(), BehaviorError> + Send + Sync,
{
    fn run(&self, ctx: &ExecutionContext) -> Result<(), BehaviorError> {
        self(ctx)
    }
}

/// Registration data for a skill.
#[derive(Clone, Debug, PartialEq)]
pub struct SkillSpec {
    pub id: Iri,
    pub realizes: Iri,
    pub host: Iri,
    /// Type descriptions accepted as start parameters.
    pub parameters: Vec<Iri>,
}

impl SkillSpec {
    pub fn new(id: Iri, realizes: Iri, host: Iri) -> Self {
        SkillSpec {
            id,
            realizes,
            host,
            parameters: Vec::new(),
        }
    }

    pub fn accepts(mut self, type_description: Iri) -> Self {
        self.parameters.push(type_description);
        self
    }
}

const SEEN_CAPACITY: usize = 4096;

struct Inner {
    last: StateEvent,
    generation: u64,
    start_correlation: Option<String>,
    parameters: Vec<Parameter>,
    pending_completion: bool,
    pending_failure: Option<String>,
    seen: HashSet<String>,
    seen_order: VecDeque<String>,
    observers: Vec<mpsc::UnboundedSender<StateEvent>>,
    shutdown: bool,
}

pub struct Skill {
    id: Iri,
    realizes: Iri,
    host: Iri,
    parameter_types: BTreeMap<Iri, Datatype>,
    behavior: Arc<dyn Behavior>,
    inner: Mutex<Inner>,
    changed: Condvar,
    this: Weak<Skill>,
}

impl std::fmt::Debug for Skill {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Skill")
            .field("id", &self.id)
            .field("state", &self.state())
            .finish()
    }
}

impl Skill {
    fn new(spec: SkillSpec, parameter_types: BTreeMap<Iri, Datatype>, behavior: Arc<dyn Behavior>) -> Arc<Self> {
        let initial = StateEvent {
            skill: spec.id.clone(),
            state: SkillState::Idle,
            sequence: 0,
            correlation_id: None,
            at: Utc::now(),
            detail: None,
        };
        Arc::new_cyclic(|this| Skill {
            id: spec.id,
            realizes: spec.realizes,
            host: spec.host,
            parameter_types,
            behavior,
            inner: Mutex::new(Inner {
                last: initial,
                generation: 0,
                start_correlation: None,
                parameters: Vec::new(),
                pending_completion: false,
                pending_failure: None,
                seen: HashSet::new(),
                seen_order: VecDeque::new(),
                observers: Vec::new(),
                shutdown: false,
            }),
            changed: Condvar::new(),
            this: this.clone(),
        })
    }

    pub fn id(&self) -> &Iri {
        &self.id
    }

    pub fn realizes(&self) -> &Iri {
        &self.realizes
    }

    pub fn host(&self) -> &Iri {
        &self.host
    }

    pub fn state(&self) -> SkillState {
        self.inner.lock().last.state
    }

    /// Latest state event.
    pub fn snapshot(&self) -> StateEvent {
        self.inner.lock().last.clone()
    }

    /// Stream of state events, starting with the current one.
    pub fn observe(&self) -> mpsc::UnboundedReceiver<StateEvent> {
        let (tx, rx) = mpsc::unbounded_channel();
        let mut inner = self.inner.lock();
        let _ = tx.send(inner.last.clone());
        inner.observers.push(tx);
        rx
    }

    /// Applies a transition command.
    pub fn command(&self, cmd: Command) -> CommandOutcome {
        let mut inner = self.inner.lock();
        if let Some(id) = &cmd.correlation_id {
            if inner.seen.contains(id) {
                return CommandOutcome::Duplicate(inner.last.clone());
            }
        }
        let current = inner.last.state;
        let Some(target) = cmd.kind.target(current) else {
            return CommandOutcome::Rejected {
                reason: format!("{} not permissible in {}", cmd.kind, current),
                state: current,
            };
        };
        if cmd.kind == TransitionCommand::Start {
            if let Err(reason) = self.check_parameters(&cmd.parameters) {
                return CommandOutcome::Rejected {
                    reason,
                    state: current,
                };
            }
        }
        if let Some(id) = &cmd.correlation_id {
            inner.seen.insert(id.clone());
            inner.seen_order.push_back(id.clone());
            if inner.seen_order.len() > SEEN_CAPACITY {
                if let Some(old) = inner.seen_order.pop_front() {
                    inner.seen.remove(&old);
                }
            }
        }
        match cmd.kind {
            TransitionCommand::Start => {
                inner.parameters = cmd.parameters;
                inner.start_correlation = cmd.correlation_id.clone();
            }
            TransitionCommand::Stop | TransitionCommand::Abort => {
                // any running body becomes stale
                inner.generation += 1;
                inner.pending_completion = false;
                inner.pending_failure = None;
            }
            _ => {}
        }
        let entered = self.enter(&mut inner, target, cmd.correlation_id.clone(), None);
        self.settle(&mut inner, cmd.correlation_id);
        CommandOutcome::Accepted(entered)
    }

    fn check_parameters(&self, parameters: &[Parameter]) -> Result<(), String> {
        for p in parameters {
            match self.parameter_types.get(&p.type_description) {
                None => return Err(format!("unknown parameter {}", p.type_description)),
                Some(dt) if *dt != p.value.datatype() => {
                    return Err(format!(
                        "parameter {} expects {dt}, got {}",
                        p.type_description,
                        p.value.datatype()
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn enter(
        &self,
        inner: &mut MutexGuard<'_, Inner>,
        state: SkillState,
        correlation_id: Option<String>,
        detail: Option<String>,
    ) -> StateEvent {
        let event = StateEvent {
            skill: self.id.clone(),
            state,
            sequence: inner.last.sequence + 1,
            correlation_id,
            at: Utc::now(),
            detail,
        };
        inner.last = event.clone();
        inner.observers.retain(|tx| tx.send(event.clone()).is_ok());
        self.changed.notify_all();
        event
    }

    /// Follows automatic edges until a state that waits for a command or the body.
    fn settle(&self, inner: &mut MutexGuard<'_, Inner>, correlation_id: Option<String>) {
        loop {
            let state = inner.last.state;
            match state {
                SkillState::Starting => {
                    self.enter(inner, SkillState::Execute, correlation_id.clone(), None);
                    self.spawn_body(inner);
                    return;
                }
                SkillState::Unholding | SkillState::Unsuspending => {
                    self.enter(inner, SkillState::Execute, correlation_id.clone(), None);
                    let start = inner.start_correlation.clone();
                    if let Some(detail) = inner.pending_failure.take() {
                        inner.generation += 1;
                        self.enter(inner, SkillState::Aborting, start.clone(), Some(detail.clone()));
                        self.enter(inner, SkillState::Aborted, start, Some(detail));
                        return;
                    }
                    if std::mem::take(&mut inner.pending_completion) {
                        self.enter(inner, SkillState::Completing, start.clone(), None);
                        self.enter(inner, SkillState::Completed, start, None);
                    }
                    return;
                }
                SkillState::Aborting => {
                    let detail = inner.last.detail.clone();
                    self.enter(inner, SkillState::Aborted, correlation_id.clone(), detail);
                }
                other => match other.automatic_successor() {
                    Some(next) => {
                        self.enter(inner, next, correlation_id.clone(), None);
                    }
                    None => return,
                },
            }
        }
    }

    fn spawn_body(&self, inner: &mut MutexGuard<'_, Inner>) {
        inner.generation += 1;
        inner.pending_completion = false;
        inner.pending_failure = None;
        let generation = inner.generation;
        let Some(skill) = self.this.upgrade() else {
            return;
        };
        let ctx = ExecutionContext {
            skill: skill.clone(),
            generation,
            parameters: inner.parameters.clone(),
        };
        let name = format!("skill-{}", self.id.local_name());
        let spawned = thread::Builder::new().name(name).spawn(move || {
            let result = skill.behavior.run(&ctx);
            skill.body_finished(generation, result);
        });
        if let Err(e) = spawned {
            let start = inner.start_correlation.clone();
            let detail = Some(format!("could not start behavior: {e}"));
            inner.generation += 1;
            self.enter(inner, SkillState::Aborting, start.clone(), detail.clone());
            self.enter(inner, SkillState::Aborted, start, detail);
        }
    }

    fn body_finished(&self, generation: u64, result: Result<(), BehaviorError>) {
        let mut inner = self.inner.lock();
        if inner.generation != generation || inner.shutdown {
            return;
        }
        let start = inner.start_correlation.clone();
        let state = inner.last.state;
        match result {
            Ok(()) => match state {
                SkillState::Execute => {
                    self.enter(&mut inner, SkillState::Completing, start.clone(), None);
                    self.enter(&mut inner, SkillState::Completed, start, None);
                }
                SkillState::Held | SkillState::Suspended => inner.pending_completion = true,
                _ => {}
            },
            Err(BehaviorError::Interrupted) => {}
            Err(BehaviorError::Failed(detail)) => {
                if matches!(state, SkillState::Execute | SkillState::Held | SkillState::Suspended) {
                    inner.generation += 1;
                    self.enter(&mut inner, SkillState::Aborting, start.clone(), Some(detail.clone()));
                    self.enter(&mut inner, SkillState::Aborted, start, Some(detail));
                }
            }
        }
    }

    /// Blocks until the skill reaches a state satisfying `pred` or the timeout elapses.
    pub fn wait_for(&self, timeout: Duration, pred: impl Fn(SkillState) -> bool) -> Option<StateEvent> {
        let deadline = Instant::now() + timeout;
        let mut inner = self.inner.lock();
        loop {
            if pred(inner.last.state) {
                return Some(inner.last.clone());
            }
            if self.changed.wait_until(&mut inner, deadline).timed_out() {
                return pred(inner.last.state).then(|| inner.last.clone());
            }
        }
    }

    /// Interrupts any running body and closes all observer streams.
    pub fn shutdown(&self) {
        let mut inner = self.inner.lock();
        inner.shutdown = true;
        inner.observers.clear();
        self.changed.notify_all();
    }

    /// Waits while the run is paused; errors once it is cut short.
    fn checkpoint(&self, generation: u64) -> Result<(), BehaviorError> {
        let mut inner = self.inner.lock();
        loop {
            if inner.shutdown || inner.generation != generation {
                return Err(BehaviorError::Interrupted);
            }
            match inner.last.state {
                SkillState::Execute => return Ok(()),
                SkillState::Held | SkillState::Suspended => self.changed.wait(&mut inner),
                _ => return Err(BehaviorError::Interrupted),
            }
        }
    }

    /// Sleeps for `d` of executing time. Paused time does not count.
    fn run_for(&self, generation: u64, d: Duration) -> Result<(), BehaviorError> {
        let mut remaining = d;
        loop {
            self.checkpoint(generation)?;
            if remaining.is_zero() {
                return Ok(());
            }
            let mut inner = self.inner.lock();
            if inner.shutdown || inner.generation != generation || inner.last.state != SkillState::Execute {
                continue;
            }
            let started = Instant::now();
            let _ = self.changed.wait_for(&mut inner, remaining);
            remaining = remaining.saturating_sub(started.elapsed());
        }
    }
}

/// Handle a behavior body uses to read its parameters and cooperate with commands.
pub struct ExecutionContext {
    skill: Arc<Skill>,
    generation: u64,
    parameters: Vec<Parameter>,
}

impl ExecutionContext {
    pub fn skill(&self) -> &Iri {
        &self.skill.id
    }

    pub fn parameters(&self) -> &[Parameter] {
        &self.parameters
    }

    pub fn parameter(&self, type_description: &Iri) -> Option<&Literal> {
        self.parameters
            .iter()
            .find(|p| &p.type_description == type_description)
            .map(|p| &p.value)
    }

    /// Returns immediately while executing, blocks while held or suspended,
    /// and errors once the run is stopped, aborted or shut down.
    pub fn checkpoint(&self) -> Result<(), BehaviorError> {
        self.skill.checkpoint(self.generation)
    }

    pub fn sleep(&self, d: Duration) -> Result<(), BehaviorError> {
        self.skill.run_for(self.generation, d)
    }

    pub fn state(&self) -> SkillState {
        self.skill.state()
    }
}

/// All skills known to one process.
#[derive(Default)]
pub struct SkillRuntime {
    skills: RwLock<BTreeMap<Iri, Arc<Skill>>>,
}

impl SkillRuntime {
    pub fn new() -> Self {
        SkillRuntime::default()
    }

    /// Registers a skill in Idle and records it in `kb`.
    pub fn register(
        &self,
        kb: &mut KnowledgeBase,
        spec: SkillSpec,
        behavior: Arc<dyn Behavior>,
    ) -> Result<Arc<Skill>, SkillError> {
        if self.skills.read().contains_key(&spec.id) || kb.is_instance_of(&spec.id, &cask::SKILL) {
            return Err(SkillError::DuplicateSkill(spec.id.clone()));
        }
        if !capability::is_capability(kb, &spec.realizes) {
            return Err(SkillError::UnknownCapability(spec.realizes.clone()));
        }
        if !capability::capabilities_provided_by(kb, &spec.host).contains(&spec.realizes) {
            return Err(SkillError::CapabilityNotProvidedByHost {
                host: spec.host.clone(),
                capability: spec.realizes.clone(),
            });
        }
        let mut parameter_types = BTreeMap::new();
        for td in &spec.parameters {
            parameter_types.insert(td.clone(), property::type_description(kb, td)?.datatype);
        }
        kb.assert(Assertion::typed(&spec.id, &cask::SKILL));
        kb.assert(Assertion::link(&spec.realizes, &cask::IS_REALIZED_BY, &spec.id));
        kb.assert(Assertion::link(&spec.id, &cask::HOSTED_BY, &spec.host));
        for td in &spec.parameters {
            property::declare_data_element(kb, &spec.id, td)?;
        }
        let skill = Skill::new(spec, parameter_types, behavior);
        self.skills.write().insert(skill.id.clone(), skill.clone());
        Ok(skill)
    }

    pub fn get(&self, id: &Iri) -> Result<Arc<Skill>, SkillError> {
        self.skills
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| SkillError::UnknownSkill(id.clone()))
    }

    pub fn skills(&self) -> Vec<Arc<Skill>> {
        self.skills.read().values().cloned().collect()
    }

    pub fn command(&self, id: &Iri, cmd: Command) -> Result<CommandOutcome, SkillError> {
        Ok(self.get(id)?.command(cmd))
    }

    pub fn observe(&self, id: &Iri) -> Result<mpsc::UnboundedReceiver<StateEvent>, SkillError> {
        Ok(self.get(id)?.observe())
    }

    pub fn shutdown(&self) {
        for skill in self.skills.read().values() {
            skill.shutdown();
        }
    }
}

/// Skills recorded in `kb` that realize `capability`.
pub fn skills_realizing(kb: &KnowledgeBase, capability: &Iri) -> Vec<Iri> {
    kb.objects(capability, &cask::IS_REALIZED_BY)
        .into_iter()
        .filter(|s| kb.is_instance_of(s, &cask::SKILL))
        .collect()
}

/// The capability a skill realizes, from `kb`.
pub fn realized_capability(kb: &KnowledgeBase, skill: &Iri) -> Option<Iri> {
    kb.subjects(&cask::IS_REALIZED_BY, skill)
        .into_iter()
        .find(|c| kb.is_instance_of(c, &vdi3682::PROCESS_OPERATOR))
}
