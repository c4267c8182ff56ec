//! Skill states, transition commands and the fixed transition table.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::iri::Iri;
use crate::vocab::isa88;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SkillState {
    Idle,
    Starting,
    Execute,
    Completing,
    Completed,
    Holding,
    Held,
    Unholding,
    Suspending,
    Suspended,
    Unsuspending,
    Stopping,
    Stopped,
    Aborting,
    Aborted,
    Resetting,
}

use SkillState::*;

impl SkillState {
    pub const ALL: [SkillState; 16] = [
        Idle,
        Starting,
        Execute,
        Completing,
        Completed,
        Holding,
        Held,
        Unholding,
        Suspending,
        Suspended,
        Unsuspending,
        Stopping,
        Stopped,
        Aborting,
        Aborted,
        Resetting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Idle => "Idle",
            Starting => "Starting",
            Execute => "Execute",
            Completing => "Completing",
            Completed => "Completed",
            Holding => "Holding",
            Held => "Held",
            Unholding => "Unholding",
            Suspending => "Suspending",
            Suspended => "Suspended",
            Unsuspending => "Unsuspending",
            Stopping => "Stopping",
            Stopped => "Stopped",
            Aborting => "Aborting",
            Aborted => "Aborted",
            Resetting => "Resetting",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        SkillState::ALL.into_iter().find(|s| s.name() == name)
    }

    pub fn is_waiting(self) -> bool {
        matches!(self, Idle | Completed | Held | Suspended | Stopped | Aborted)
    }

    pub fn is_acting(self) -> bool {
        !self.is_waiting()
    }

    /// End states of one run.
    pub fn is_terminal(self) -> bool {
        matches!(self, Completed | Stopped | Aborted)
    }

    pub fn iri(self) -> Iri {
        Iri::from_static(isa88::NS).child(self.name()).expect("state names are valid IRI text")
    }

    /// Successor reached without a command, if any. Execute completes only
    /// when the behavior body returns, so it has none here.
    pub fn automatic_successor(self) -> Option<SkillState> {
        Some(match self {
            Starting => Execute,
            Completing => Completed,
            Holding => Held,
            Unholding => Execute,
            Suspending => Suspended,
            Unsuspending => Execute,
            Stopping => Stopped,
            Aborting => Aborted,
            Resetting => Idle,
            _ => return None,
        })
    }
}

impl fmt::Display for SkillState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionCommand {
    Start,
    Hold,
    Unhold,
    Suspend,
    Unsuspend,
    Stop,
    Abort,
    Reset,
}

impl TransitionCommand {
    pub const ALL: [TransitionCommand; 8] = [
        TransitionCommand::Start,
        TransitionCommand::Hold,
        TransitionCommand::Unhold,
        TransitionCommand::Suspend,
        TransitionCommand::Unsuspend,
        TransitionCommand::Stop,
        TransitionCommand::Abort,
        TransitionCommand::Reset,
    ];

    /// Lowercase wire name.
    pub fn name(self) -> &'static str {
        match self {
            TransitionCommand::Start => "start",
            TransitionCommand::Hold => "hold",
            TransitionCommand::Unhold => "unhold",
            TransitionCommand::Suspend => "suspend",
            TransitionCommand::Unsuspend => "unsuspend",
            TransitionCommand::Stop => "stop",
            TransitionCommand::Abort => "abort",
            TransitionCommand::Reset => "reset",
        }
    }

    /// Exact lowercase match only.
    pub fn parse(name: &str) -> Option<Self> {
        TransitionCommand::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Successor of `state` under this command, `None` if not permissible.
    pub fn target(self, state: SkillState) -> Option<SkillState> {
        use TransitionCommand as C;
        match (self, state) {
            (C::Start, Idle) => Some(Starting),
            (C::Hold, Execute) => Some(Holding),
            (C::Unhold, Held) => Some(Unholding),
            (C::Suspend, Execute) => Some(Suspending),
            (C::Unsuspend, Suspended) => Some(Unsuspending),
            (C::Abort, s) if !matches!(s, Aborting | Aborted) => Some(Aborting),
            (C::Stop, s) if !matches!(s, Aborting | Aborted | Stopping | Stopped) => Some(Stopping),
            (C::Reset, Completed | Stopped | Aborted) => Some(Resetting),
            _ => None,
        }
    }
}

impl fmt::Display for TransitionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
