//! The detection / matching / planning / retention control loop.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Control-loop states; the number is the use case each state realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlState {
    /// 0: no change in the environment.
    Monitoring,
    /// 1: an undesired situation was found.
    Detected,
    /// 2: memory holds a response for it.
    Matched,
    /// 3: no remembered response fits.
    MatchFailed,
    /// 4: the tactical level asks the decision maker for help.
    HelpRequested,
    /// 5: candidate plans are being mutated.
    Mutating,
    /// 6: the chosen plan is cloned into tasks and deployed.
    Cloning,
    /// 7: the response worked and is kept.
    Retained,
    /// 8: the response failed and is dropped.
    Ignored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlEvent {
    NoChange,
    NonselfDetected,
    MemoryMatch,
    MemoryMiss,
    PlanFound,
    PlanDeployed,
    ResponseSucceeded,
    ResponseFailed,
}

impl fmt::Display for ControlState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for ControlEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("illegal control transition: {event} in state {state}")]
pub struct IllegalTransition {
    pub state: ControlState,
    pub event: ControlEvent,
}

/// Next state for `event`, or an error for any edge outside the loop.
///
/// The escalation path consumes a memory miss at each hand-off: the
/// tactical agent's miss (Detected -> MatchFailed), its escalation
/// (-> HelpRequested), and the decision maker starting the search
/// (-> Mutating). A dropped response re-enters the search the same way.
pub fn control_step(
    state: ControlState,
    event: ControlEvent,
) -> Result<ControlState, IllegalTransition> {
    use ControlEvent as E;
    use ControlState as S;
    let next = match (state, event) {
        (S::Monitoring, E::NoChange) => S::Monitoring,
        (S::Monitoring, E::NonselfDetected) => S::Detected,
        (S::Detected, E::MemoryMatch) => S::Matched,
        (S::Detected, E::MemoryMiss) => S::MatchFailed,
        (S::MatchFailed, E::MemoryMiss) => S::HelpRequested,
        (S::HelpRequested, E::MemoryMiss) => S::Mutating,
        (S::Matched, E::PlanFound) | (S::Mutating, E::PlanFound) => S::Cloning,
        (S::Cloning, E::PlanDeployed) => S::Cloning,
        (S::Cloning, E::ResponseSucceeded) => S::Retained,
        (S::Cloning, E::ResponseFailed) => S::Ignored,
        (S::Retained, E::NoChange) => S::Monitoring,
        (S::Ignored, E::MemoryMiss) => S::Mutating,
        _ => return Err(IllegalTransition { state, event }),
    };
    Ok(next)
}

/// Applies `events` in order from `start`, returning every visited state
/// (including `start`).
pub fn replay(
    start: ControlState,
    events: impl IntoIterator<Item = ControlEvent>,
) -> Result<Vec<ControlState>, IllegalTransition> {
    let mut states = vec![start];
    let mut current = start;
    for event in events {
        current = control_step(current, event)?;
        states.push(current);
    }
    Ok(states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ControlEvent as E;
    use ControlState as S;

    const STATES: [ControlState; 9] = [
        S::Monitoring,
        S::Detected,
        S::Matched,
        S::MatchFailed,
        S::HelpRequested,
        S::Mutating,
        S::Cloning,
        S::Retained,
        S::Ignored,
    ];
    const EVENTS: [ControlEvent; 8] = [
        E::NoChange,
        E::NonselfDetected,
        E::MemoryMatch,
        E::MemoryMiss,
        E::PlanFound,
        E::PlanDeployed,
        E::ResponseSucceeded,
        E::ResponseFailed,
    ];

    #[test]
    fn quiet_environment_stays_put() {
        assert_eq!(control_step(S::Monitoring, E::NoChange), Ok(S::Monitoring));
    }

    #[test]
    fn failed_response_loops_back_to_mutation() {
        assert_eq!(control_step(S::Cloning, E::ResponseFailed), Ok(S::Ignored));
        assert_eq!(control_step(S::Ignored, E::MemoryMiss), Ok(S::Mutating));
    }

    #[test]
    fn successful_response_returns_to_monitoring() {
        let states = replay(S::Cloning, [E::ResponseSucceeded, E::NoChange]).unwrap();
        assert_eq!(states, vec![S::Cloning, S::Retained, S::Monitoring]);
    }

    #[test]
    fn planning_path() {
        let states = replay(
            S::Monitoring,
            [
                E::NonselfDetected,
                E::MemoryMiss,
                E::MemoryMiss,
                E::MemoryMiss,
                E::PlanFound,
                E::PlanDeployed,
            ],
        )
        .unwrap();
        assert_eq!(
            states,
            vec![
                S::Monitoring,
                S::Detected,
                S::MatchFailed,
                S::HelpRequested,
                S::Mutating,
                S::Cloning,
                S::Cloning
            ]
        );
    }

    #[test]
    fn reuse_path() {
        let states = replay(
            S::Monitoring,
            [E::NonselfDetected, E::MemoryMatch, E::PlanFound],
        )
        .unwrap();
        assert_eq!(*states.last().unwrap(), S::Cloning);
    }

    #[test]
    fn exactly_thirteen_legal_edges() {
        let legal = STATES
            .iter()
            .flat_map(|&s| EVENTS.iter().map(move |&e| (s, e)))
            .filter(|&(s, e)| control_step(s, e).is_ok())
            .count();
        assert_eq!(legal, 13);
    }

    #[test]
    fn illegal_edges_fail() {
        let err = control_step(S::Monitoring, E::PlanFound).unwrap_err();
        assert_eq!(err.state, S::Monitoring);
        assert!(control_step(S::Retained, E::ResponseFailed).is_err());
        assert!(control_step(S::Detected, E::NoChange).is_err());
    }
}
