use serde::{Deserialize, Serialize};
use teleop_core::{GoalMsg, GridGeometry, Mode};
use teleop_netlink::Connectivity;

use crate::error::AgentError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeState {
    pub mode: Mode,
    pub last_goal: Option<GoalMsg>,
    pub since: f64,
}

impl ModeState {
    pub fn new(now: f64) -> Self {
        Self {
            mode: Mode::Remote,
            last_goal: None,
            since: now,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionReason {
    ConnectivityLost,
    ConnectivityRestored,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub stamp: f64,
    pub from: Mode,
    pub to: Mode,
    pub reason: TransitionReason,
}

/// Every mode change, in order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionLog {
    entries: Vec<Transition>,
}

impl TransitionLog {
    pub fn push(&mut self, t: Transition) {
        debug_assert!(self.entries.last().is_none_or(|p| p.to == t.from && p.stamp <= t.stamp));
        self.entries.push(t);
    }

    pub fn entries(&self) -> &[Transition] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// Drive with the operator's latest command.
    PassThrough,
    /// Hold still.
    Stop,
    /// Announce the goal on the local /move_base_simple/goal topic.
    RepublishGoal(GoalMsg),
    /// Keep following the plan to the last goal.
    Navigate,
    /// Drop the autonomous plan.
    CancelNavigation,
}

/// One step of the mode state machine.
pub fn supervise_tick(status: Connectivity, state: &ModeState, now: f64) -> (ModeState, Option<Transition>, Vec<Action>) {
    let switch = |to: Mode, reason| {
        let next = ModeState {
            mode: to,
            last_goal: state.last_goal.clone(),
            since: now,
        };
        let t = Transition {
            stamp: now,
            from: state.mode,
            to,
            reason,
        };
        (next, Some(t))
    };
    match (status, state.mode, &state.last_goal) {
        (Connectivity::Good, Mode::Remote, _) => (state.clone(), None, vec![Action::PassThrough]),
        (Connectivity::Bad, Mode::Remote, Some(goal)) => {
            let (next, t) = switch(Mode::Autonomous, TransitionReason::ConnectivityLost);
            (next, t, vec![Action::RepublishGoal(goal.clone()), Action::Navigate])
        }
        (Connectivity::Bad, Mode::Remote, None) => (state.clone(), None, vec![Action::Stop]),
        (Connectivity::Good, Mode::Autonomous, _) => {
            let (next, t) = switch(Mode::Remote, TransitionReason::ConnectivityRestored);
            (next, t, vec![Action::CancelNavigation, Action::Stop])
        }
        (Connectivity::Bad, Mode::Autonomous, _) => (state.clone(), None, vec![Action::Navigate]),
    }
}

/// Stores `msg` as the last known goal if it lies on the map.
pub fn handle_goal(msg: &GoalMsg, state: &ModeState, map: &GridGeometry) -> Result<ModeState, AgentError> {
    if msg.frame != "map" {
        return Err(AgentError::GoalFrame(msg.frame.clone()));
    }
    if map.world_to_grid(msg.pose.position()).is_err() {
        return Err(AgentError::GoalOutsideMap {
            x: msg.pose.x,
            y: msg.pose.y,
        });
    }
    Ok(ModeState {
        last_goal: Some(msg.clone()),
        ..state.clone()
    })
}
