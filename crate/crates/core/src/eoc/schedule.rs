use super::roles::{AgentRole, EocConfig};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

/// Hours between clock ticks.
pub const TICK_HOURS: u32 = 2;
/// Interval between operational census reports.
pub const REPORT_EVERY_HOURS: u32 = 6;
/// Hour of the decision maker's daily review.
pub const DECISION_HOUR: u32 = 4;
/// Delay between a plan being issued and its tasks being allocated.
pub const ALLOCATION_DELAY_HOURS: u32 = 4;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("hour {0} is not on the 2-hour clock (0, 2, ..., 22)")]
pub struct ClockError(pub u32);

/// Things agents do. Declaration order breaks ties between activities of
/// the same agent at the same time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Activity {
    Report,
    Aggregate,
    Allocate,
    CheckpointStatus,
    FinalStatus,
    Decide,
    Replan,
    FinalDecision,
    CancelTasks,
    CompleteTask { plan_id: u64, task_index: usize },
}

/// One agent activity at one timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Due {
    pub day: u32,
    pub hour: u32,
    pub role: AgentRole,
    pub agent: u32,
    pub activity: Activity,
}

fn check_hour(hour: u32) -> Result<(), ClockError> {
    if !hour.is_multiple_of(TICK_HOURS) || hour >= 24 {
        Err(ClockError(hour))
    } else {
        Ok(())
    }
}

/// Recurring activities due at (`day`, `hour`): operational reports every
/// six hours, aggregation two hours after each report, and the decision
/// maker's daily review.
pub fn schedule(eoc: &EocConfig, day: u32, hour: u32) -> Result<Vec<Due>, ClockError> {
    check_hour(hour)?;
    let mut due = Vec::new();
    let at = |role, agent, activity| Due {
        day,
        hour,
        role,
        agent,
        activity,
    };
    if hour.is_multiple_of(REPORT_EVERY_HOURS) {
        due.extend((0..eoc.operational).map(|k| at(AgentRole::Operational, k, Activity::Report)));
    }
    if hour % REPORT_EVERY_HOURS == TICK_HOURS {
        due.push(at(AgentRole::TacticalCommunication, 0, Activity::Aggregate));
    }
    if hour == DECISION_HOUR {
        due.push(at(AgentRole::DecisionMaking, 0, Activity::Decide));
    }
    Ok(due)
}

/// Adds `hours` to a (day, hour) timestamp.
pub fn later(day: u32, hour: u32, hours: u32) -> (u32, u32) {
    let total = hour + hours;
    (day + total / 24, total % 24)
}

/// Deterministic agenda ordered by (timestamp, role, agent, activity,
/// insertion order).
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<(Due, u64)>>,
    seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        EventQueue::default()
    }

    pub fn push(&mut self, due: Due) -> Result<(), ClockError> {
        check_hour(due.hour)?;
        self.heap.push(Reverse((due, self.seq)));
        self.seq += 1;
        Ok(())
    }

    /// Next activity if it is due at or before (`day`, `hour`).
    pub fn pop_due(&mut self, day: u32, hour: u32) -> Option<Due> {
        let Reverse((next, _)) = self.heap.peek()?;
        if (next.day, next.hour) <= (day, hour) {
            self.heap.pop().map(|Reverse((due, _))| due)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
