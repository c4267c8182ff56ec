//! Runs a plan against live skills.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;
use std::time::Duration;

use aurcap_core::planner::{Assignment, Plan};
use aurcap_core::skill::{SkillState, TransitionCommand};
use aurcap_core::Iri;
use chrono::{DateTime, Utc};
use parking_lot::Mutex;
use serde::Serialize;
use thiserror::Error;
use tokio::sync::watch;
use tokio::task::JoinSet;
use tracing::{info, warn};

use crate::transport::{InvokeError, SkillTransport, StateFeed, TransportRegistry, DEFAULT_DEADLINE};
use crate::wire::{CommandMessage, StateMessage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecuteError {
    #[error("skill {0} is in use by another mission")]
    SkillBusy(Iri),
    #[error("step {0}: skill interface did not answer in time")]
    InterfaceTimeout(Iri),
    #[error(transparent)]
    Invoke(#[from] InvokeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepStatus {
    Pending,
    Running,
    Completed,
    Failed,
    /// Never started because the mission failed first.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StepReport {
    pub step: Iri,
    pub robot: Iri,
    pub skill: Iri,
    pub interface: String,
    pub status: StepStatus,
    pub reason: Option<String>,
    pub started_at: Option<DateTime<Utc>>,
    pub finished_at: Option<DateTime<Utc>>,
    pub trajectory: Vec<StateMessage>,
}

impl StepReport {
    pub fn states(&self) -> Vec<SkillState> {
        self.trajectory.iter().map(|m| m.state).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum ExecutionStatus {
    Running,
    Succeeded,
    Failed { step: Iri, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExecutionReport {
    pub mission: Iri,
    #[serde(flatten)]
    pub status: ExecutionStatus,
    pub steps: Vec<StepReport>,
}

impl ExecutionReport {
    /// Report with every step pending.
    pub fn pending(plan: &Plan) -> Self {
        ExecutionReport {
            mission: plan.mission.clone(),
            status: ExecutionStatus::Running,
            steps: plan
                .assignments
                .iter()
                .map(|a| StepReport {
                    step: a.step.clone(),
                    robot: a.robot.clone(),
                    skill: a.skill.clone(),
                    interface: a.interface.kind().name().to_string(),
                    status: StepStatus::Pending,
                    reason: None,
                    started_at: None,
                    finished_at: None,
                    trajectory: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn step(&self, id: &Iri) -> Option<&StepReport> {
        self.steps.iter().find(|s| &s.step == id)
    }

    pub fn succeeded(&self) -> bool {
        self.status == ExecutionStatus::Succeeded
    }
}

/// Shared view of a running execution.
pub type Progress = Arc<Mutex<ExecutionReport>>;

pub struct Executor {
    transports: Arc<TransportRegistry>,
    busy: Arc<Mutex<HashSet<Iri>>>,
    deadline: Duration,
}

struct Claim {
    busy: Arc<Mutex<HashSet<Iri>>>,
    skills: Vec<Iri>,
}

impl Drop for Claim {
    fn drop(&mut self) {
        let mut busy = self.busy.lock();
        for s in &self.skills {
            busy.remove(s);
        }
    }
}

enum StepEnd {
    Completed,
    Skipped,
    Failed { reason: String, timeout: bool },
}

impl Executor {
    pub fn new(transports: Arc<TransportRegistry>) -> Self {
        Executor {
            transports,
            busy: Arc::new(Mutex::new(HashSet::new())),
            deadline: DEFAULT_DEADLINE,
        }
    }

    /// Longest wait for any single answer from a skill.
    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = deadline;
        self
    }

    pub async fn execute(&self, plan: &Plan) -> Result<ExecutionReport, ExecuteError> {
        self.execute_into(plan, Arc::new(Mutex::new(ExecutionReport::pending(plan)))).await
    }

    fn claim(&self, plan: &Plan) -> Result<Claim, ExecuteError> {
        let mut busy = self.busy.lock();
        let skills: Vec<Iri> = plan.assignments.iter().map(|a| a.skill.clone()).collect::<HashSet<_>>().into_iter().collect();
        if let Some(s) = skills.iter().find(|s| busy.contains(*s)) {
            return Err(ExecuteError::SkillBusy(s.clone()));
        }
        busy.extend(skills.iter().cloned());
        Ok(Claim {
            busy: self.busy.clone(),
            skills,
        })
    }

    /// Resolves transports and reserves the plan's skills; nothing is sent yet.
    pub fn prepare(&self, plan: &Plan) -> Result<PreparedRun, ExecuteError> {
        let transports = plan
            .assignments
            .iter()
            .map(|a| self.transports.for_descriptor(&a.interface))
            .collect::<Result<Vec<_>, _>>()?;
        let claim = self.claim(plan)?;
        Ok(PreparedRun {
            plan: plan.clone(),
            transports,
            deadline: self.deadline,
            _claim: claim,
        })
    }

    pub async fn execute_into(&self, plan: &Plan, progress: Progress) -> Result<ExecutionReport, ExecuteError> {
        self.prepare(plan)?.run(progress).await
    }
}

/// A plan whose skills are reserved until the run finishes or this is dropped.
pub struct PreparedRun {
    plan: Plan,
    transports: Vec<Arc<dyn SkillTransport>>,
    deadline: Duration,
    _claim: Claim,
}

impl PreparedRun {
    /// Runs the plan, keeping `progress` current. Independent steps run concurrently;
    /// the first failure aborts steps in flight and skips those not yet started.
    pub async fn run(self, progress: Progress) -> Result<ExecutionReport, ExecuteError> {
        let plan = &self.plan;
        let (abort_tx, abort_rx) = watch::channel(false);
        let abort_tx = Arc::new(abort_tx);
        let mut done_tx = HashMap::new();
        let mut done_rx = HashMap::new();
        for a in &plan.assignments {
            let (tx, rx) = watch::channel(None::<bool>);
            done_tx.insert(a.step.clone(), tx);
            done_rx.insert(a.step.clone(), rx);
        }
        let mut skill_locks: HashMap<Iri, Arc<tokio::sync::Mutex<()>>> = HashMap::new();

        let mut tasks = JoinSet::new();
        for (i, (a, transport)) in plan.assignments.iter().zip(self.transports.iter().cloned()).enumerate() {
            let deps: Vec<_> = a.depends_on.iter().filter_map(|d| done_rx.get(d).cloned()).collect();
            let done = done_tx.remove(&a.step).expect("one sender per step");
            let lock = skill_locks.entry(a.skill.clone()).or_default().clone();
            let run = StepRun {
                index: i,
                assignment: a.clone(),
                transport,
                progress: progress.clone(),
                abort: abort_rx.clone(),
                deadline: self.deadline,
            };
            let abort_tx = abort_tx.clone();
            tasks.spawn(async move {
                let end = run.gated(deps, lock).await;
                let ok = matches!(end, StepEnd::Completed);
                if !ok {
                    abort_tx.send_replace(true);
                }
                let _ = done.send(Some(ok));
                (run.assignment.step, end)
            });
        }

        let mut timed_out = None;
        while let Some(joined) = tasks.join_next().await {
            match joined {
                Ok((step, StepEnd::Failed { timeout: true, .. })) => {
                    timed_out.get_or_insert(step);
                }
                Ok(_) => {}
                Err(e) => warn!(error = %e, "step task panicked"),
            }
        }

        let report = {
            let mut p = progress.lock();
            if p.status == ExecutionStatus::Running {
                p.status = ExecutionStatus::Succeeded;
            }
            p.clone()
        };
        info!(mission = %plan.mission, status = ?report.status, "execution finished");
        match timed_out {
            Some(step) => Err(ExecuteError::InterfaceTimeout(step)),
            None => Ok(report),
        }
    }
}

struct StepRun {
    index: usize,
    assignment: Assignment,
    transport: Arc<dyn SkillTransport>,
    progress: Progress,
    abort: watch::Receiver<bool>,
    deadline: Duration,
}

impl StepRun {
    fn update(&self, f: impl FnOnce(&mut StepReport)) {
        f(&mut self.progress.lock().steps[self.index]);
    }

    fn record(&self, m: StateMessage) -> SkillState {
        let state = m.state;
        self.update(|s| s.trajectory.push(m));
        state
    }

    async fn gated(&self, deps: Vec<watch::Receiver<Option<bool>>>, lock: Arc<tokio::sync::Mutex<()>>) -> StepEnd {
        for mut rx in deps {
            let ok = match rx.wait_for(Option::is_some).await {
                Ok(v) => *v == Some(true),
                Err(_) => false,
            };
            if !ok {
                return self.skip();
            }
        }
        let _serial = lock.lock().await;
        if *self.abort.borrow() {
            return self.skip();
        }
        let end = self.run().await;
        let now = Utc::now();
        match &end {
            StepEnd::Completed => self.update(|s| {
                s.status = StepStatus::Completed;
                s.finished_at = Some(now);
            }),
            StepEnd::Failed { reason, .. } => {
                self.update(|s| {
                    s.status = StepStatus::Failed;
                    s.reason = Some(reason.clone());
                    s.finished_at = Some(now);
                });
                let mut p = self.progress.lock();
                if p.status == ExecutionStatus::Running {
                    p.status = ExecutionStatus::Failed {
                        step: self.assignment.step.clone(),
                        reason: reason.clone(),
                    };
                }
            }
            StepEnd::Skipped => {}
        }
        end
    }

    fn skip(&self) -> StepEnd {
        self.update(|s| s.status = StepStatus::Skipped);
        StepEnd::Skipped
    }

    async fn send(&self, cmd: &CommandMessage) -> Result<(), InvokeError> {
        self.transport.send(&self.assignment.interface, cmd, self.deadline).await
    }

    async fn run(&self) -> StepEnd {
        match self.drive().await {
            Ok(end) => end,
            Err(e) => {
                let timeout = matches!(e, InvokeError::Timeout(_));
                if timeout {
                    // best effort: do not leave the skill acting on its own
                    let abort = CommandMessage::new(TransitionCommand::Abort);
                    let _ = self.transport.send(&self.assignment.interface, &abort, Duration::from_secs(1)).await;
                }
                StepEnd::Failed {
                    reason: e.to_string(),
                    timeout,
                }
            }
        }
    }

    async fn follow_until(&self, feed: &mut StateFeed, pred: impl Fn(SkillState) -> bool) -> Result<SkillState, InvokeError> {
        loop {
            let state = self.record(feed.next().await?);
            if pred(state) {
                return Ok(state);
            }
        }
    }

    async fn drive(&self) -> Result<StepEnd, InvokeError> {
        let a = &self.assignment;
        let mut feed = self.transport.watch(&a.interface, self.deadline).await?;
        let mut state = self.record(feed.next().await?);
        if state.is_terminal() {
            self.send(&CommandMessage::new(TransitionCommand::Reset)).await?;
            state = self.follow_until(&mut feed, |s| s == SkillState::Idle).await?;
        }
        if state != SkillState::Idle {
            return Ok(StepEnd::Failed {
                reason: format!("skill {} is {state}, not Idle", a.skill),
                timeout: false,
            });
        }
        self.update(|s| {
            s.status = StepStatus::Running;
            s.started_at = Some(Utc::now());
        });
        let start = CommandMessage::new(TransitionCommand::Start).with_parameters(&a.parameters);
        if let Err(e) = self.send(&start).await {
            return match e {
                InvokeError::Rejected(reason) => Ok(StepEnd::Failed { reason, timeout: false }),
                e => Err(e),
            };
        }

        let mut abort = self.abort.clone();
        let mut abort_sent = false;
        let last = loop {
            if !abort_sent && *abort.borrow_and_update() {
                abort_sent = true;
                if let Err(e) = self.send(&CommandMessage::new(TransitionCommand::Abort)).await {
                    warn!(step = %a.step, error = %e, "abort not delivered");
                }
            }
            tokio::select! {
                m = feed.next() => {
                    let m = m?;
                    let detail = m.detail.clone();
                    let state = self.record(m);
                    if state.is_terminal() {
                        break (state, detail);
                    }
                }
                changed = abort.changed(), if !abort_sent => {
                    if changed.is_err() {
                        abort_sent = true;
                    }
                }
            }
        };
        Ok(match last {
            (SkillState::Completed, _) => StepEnd::Completed,
            (_, _) if abort_sent => StepEnd::Failed {
                reason: "aborted after another step failed".into(),
                timeout: false,
            },
            (state, detail) => StepEnd::Failed {
                reason: detail.unwrap_or_else(|| format!("skill ended {state}")),
                timeout: false,
            },
        })
    }
}
