//! EOC message traffic and the round log.
//!
//! A round log is one JSON object per line:
//!
//! ```text
//! {"agent":"Operational_0_EOC1","role":"operational","eoc":"EOC1","action_description":"Reporting disease spread sit.","day":0,"hour":0,"details":{"kind":"situation_report","report_id":0,"situation":{...}}}
//! ```

use super::control::{control_step, ControlEvent, ControlState, IllegalTransition};
use super::roles::AgentRole;
use crate::plan::Action;
use crate::situation::Situation;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Message {
    SituationReport {
        report_id: u64,
        situation: Situation,
    },
    AggregatedReport {
        situation_id: u64,
        reference_report_id: u64,
        situation: Situation,
    },
    #[serde(rename = "plan")]
    PlanMsg {
        plan_id: u64,
        situation_id: u64,
        reference_report_id: u64,
        certainty: f64,
        tasks: Vec<Action>,
    },
    TaskAssignment {
        plan_id: u64,
        task_index: usize,
        task: Action,
        tactical_agent: String,
    },
    TaskStatus {
        plan_id: u64,
        task_index: usize,
        status: Status,
    },
    PlanStatus {
        plan_id: u64,
        status: Status,
        successfulness: f64,
    },
    ControlTransition {
        event: ControlEvent,
        from: ControlState,
        to: ControlState,
    },
    CaseStored {
        case_id: u64,
        successfulness: f64,
    },
}

impl Message {
    /// Log column text for this kind of message.
    pub fn description(&self) -> &'static str {
        match self {
            Message::SituationReport { .. } => "Reporting disease spread sit.",
            Message::AggregatedReport { .. } => "Reporting disease and resource sit.",
            Message::PlanMsg { .. } => "Distributing plan for execution",
            Message::TaskAssignment { .. } => "Allocating tasks to tactical agents",
            Message::TaskStatus { .. } => "Reporting task status",
            Message::PlanStatus { .. } => "Reporting plan status",
            Message::ControlTransition { .. } => "Control loop transition",
            Message::CaseStored { .. } => "Retaining case in memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub agent: String,
    pub role: AgentRole,
    pub eoc: String,
    pub action_description: String,
    pub day: u32,
    pub hour: u32,
    pub details: Message,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("round log i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed log entry: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("entry {index}: hour {hour} is not on the 2-hour clock")]
    OddHour { index: usize, hour: u32 },
    #[error("entry {index}: timestamp goes backwards")]
    Backwards { index: usize },
    #[error("entry {index}: {what} {id} references nothing earlier in the log")]
    Dangling {
        index: usize,
        what: &'static str,
        id: u64,
    },
    #[error("entry {index}: duplicate {what} {id}")]
    Duplicate {
        index: usize,
        what: &'static str,
        id: u64,
    },
    #[error("entry {index}: transition recorded from {recorded} but the loop is in {actual}")]
    OutOfStep {
        index: usize,
        recorded: ControlState,
        actual: ControlState,
    },
    #[error("entry {index}: {source}")]
    Illegal {
        index: usize,
        source: IllegalTransition,
    },
    #[error("entry {index}: transition recorded to {recorded} but the loop goes to {actual}")]
    WrongTarget {
        index: usize,
        recorded: ControlState,
        actual: ControlState,
    },
}

/// Append-only record of one round's traffic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundLog {
    entries: Vec<LogEntry>,
}

impl RoundLog {
    pub fn new() -> Self {
        RoundLog::default()
    }

    pub fn push(&mut self, entry: LogEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn messages(&self) -> impl Iterator<Item = &Message> {
        self.entries.iter().map(|e| &e.details)
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), LogError> {
        let mut out = BufWriter::new(out);
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: io::Read>(input: R) -> Result<Self, LogError> {
        let mut entries = Vec::new();
        for (n, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line).map_err(|e| LogError::Malformed {
                line: n + 1,
                reason: e.to_string(),
            })?;
            entries.push(entry);
        }
        Ok(RoundLog { entries })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LogError> {
        self.write_to(File::create(path)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LogError> {
        RoundLog::read_from(File::open(path)?)
    }

    /// Hours are even and within the day; timestamps never decrease.
    pub fn check_clock(&self) -> Result<(), LogError> {
        let mut last = (0u32, 0u32);
        for (index, e) in self.entries.iter().enumerate() {
            if e.hour % 2 != 0 || e.hour > 22 {
                return Err(LogError::OddHour {
                    index,
                    hour: e.hour,
                });
            }
            if (e.day, e.hour) < last {
                return Err(LogError::Backwards { index });
            }
            last = (e.day, e.hour);
        }
        Ok(())
    }

    /// Every id a message points at was introduced by an earlier message,
    /// and ids are unique per kind.
    pub fn check_references(&self) -> Result<(), LogError> {
        let mut reports = HashSet::new();
        let mut situations = HashSet::new();
        let mut plans = HashSet::new();
        let mut cases = HashSet::new();
        let fresh = |set: &mut HashSet<u64>, index, what, id| {
            if set.insert(id) {
                Ok(())
            } else {
                Err(LogError::Duplicate { index, what, id })
            }
        };
        let known = |set: &HashSet<u64>, index, what, id| {
            if set.contains(&id) {
                Ok(())
            } else {
                Err(LogError::Dangling { index, what, id })
            }
        };
        for (index, e) in self.entries.iter().enumerate() {
            match &e.details {
                Message::SituationReport { report_id, .. } => {
                    fresh(&mut reports, index, "report", *report_id)?
                }
                Message::AggregatedReport {
                    situation_id,
                    reference_report_id,
                    ..
                } => {
                    known(&reports, index, "report", *reference_report_id)?;
                    fresh(&mut situations, index, "situation", *situation_id)?;
                }
                Message::PlanMsg {
                    plan_id,
                    situation_id,
                    reference_report_id,
                    ..
                } => {
                    known(&situations, index, "situation", *situation_id)?;
                    known(&reports, index, "report", *reference_report_id)?;
                    fresh(&mut plans, index, "plan", *plan_id)?;
                }
                Message::TaskAssignment { plan_id, .. }
                | Message::TaskStatus { plan_id, .. }
                | Message::PlanStatus { plan_id, .. } => known(&plans, index, "plan", *plan_id)?,
                Message::CaseStored { case_id, .. } => fresh(&mut cases, index, "case", *case_id)?,
                Message::ControlTransition { .. } => {}
            }
        }
        Ok(())
    }

    /// Replays the logged transitions through the control loop from
    /// Monitoring and returns the visited states.
    pub fn replay_control(&self) -> Result<Vec<ControlState>, LogError> {
        let mut state = ControlState::Monitoring;
        let mut visited = vec![state];
        for (index, e) in self.entries.iter().enumerate() {
            if let Message::ControlTransition { event, from, to } = e.details {
                if from != state {
                    return Err(LogError::OutOfStep {
                        index,
                        recorded: from,
                        actual: state,
                    });
                }
                let next = control_step(state, event)
                    .map_err(|source| LogError::Illegal { index, source })?;
                if next != to {
                    return Err(LogError::WrongTarget {
                        index,
                        recorded: to,
                        actual: next,
                    });
                }
                state = next;
                visited.push(state);
            }
        }
        Ok(visited)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(day: u32, hour: u32, details: Message) -> LogEntry {
        LogEntry {
            agent: "a".into(),
            role: AgentRole::Operational,
            eoc: "EOC1".into(),
            action_description: details.description().into(),
            day,
            hour,
            details,
        }
    }

    fn report(id: u64) -> Message {
        Message::SituationReport {
            report_id: id,
            situation: Situation::from_counts([997, 0, 3, 0, 0, 0, 0]),
        }
    }

    fn aggregate(situation_id: u64, reference_report_id: u64) -> Message {
        Message::AggregatedReport {
            situation_id,
            reference_report_id,
            situation: Situation::default(),
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let mut log = RoundLog::new();
        log.push(entry(0, 0, report(0)));
        log.push(entry(0, 2, aggregate(0, 0)));
        log.push(entry(
            0,
            4,
            Message::ControlTransition {
                event: ControlEvent::NonselfDetected,
                from: ControlState::Monitoring,
                to: ControlState::Detected,
            },
        ));
        let mut buf = Vec::new();
        log.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("\"kind\":\"situation_report\""));
        assert_eq!(RoundLog::read_from(&buf[..]).unwrap(), log);
    }

    #[test]
    fn dangling_reference_is_caught() {
        let mut log = RoundLog::new();
        log.push(entry(0, 0, report(0)));
        log.push(entry(0, 2, aggregate(0, 7)));
        assert!(matches!(
            log.check_references(),
            Err(LogError::Dangling { id: 7, .. })
        ));
    }

    #[test]
    fn duplicate_report_is_caught() {
        let mut log = RoundLog::new();
        log.push(entry(0, 0, report(0)));
        log.push(entry(0, 0, report(0)));
        assert!(matches!(
            log.check_references(),
            Err(LogError::Duplicate { .. })
        ));
    }

    #[test]
    fn clock_checks() {
        let mut log = RoundLog::new();
        log.push(entry(0, 2, report(0)));
        log.push(entry(0, 0, report(1)));
        assert!(matches!(
            log.check_clock(),
            Err(LogError::Backwards { index: 1 })
        ));
        let mut odd = RoundLog::new();
        odd.push(entry(0, 3, report(0)));
        assert!(matches!(
            odd.check_clock(),
            Err(LogError::OddHour { hour: 3, .. })
        ));
    }

    #[test]
    fn replay_rejects_out_of_step_transition() {
        let mut log = RoundLog::new();
        log.push(entry(
            0,
            4,
            Message::ControlTransition {
                event: ControlEvent::MemoryMiss,
                from: ControlState::Detected,
                to: ControlState::MatchFailed,
            },
        ));
        assert!(matches!(
            log.replay_control(),
            Err(LogError::OutOfStep { .. })
        ));
    }

    #[test]
    fn replay_rejects_illegal_edge() {
        let mut log = RoundLog::new();
        log.push(entry(
            0,
            4,
            Message::ControlTransition {
                event: ControlEvent::PlanFound,
                from: ControlState::Monitoring,
                to: ControlState::Cloning,
            },
        ));
        assert!(matches!(
            log.replay_control(),
            Err(LogError::Illegal { .. })
        ));
    }
}
