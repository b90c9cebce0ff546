//! The emergency operations center: responder roles, the timed message
//! protocol between them, and the control loop that turns detections into
//! deployed plans and remembered cases.

mod control;
mod message;
mod roles;
mod round;
mod schedule;

pub use control::{control_step, replay, ControlEvent, ControlState, IllegalTransition};
pub use message::{LogEntry, LogError, Message, RoundLog, Status};
pub use roles::{AgentRole, EocConfig, RoleCountError};
pub use round::{run_eoc_round, EocOutcome, EocRoundConfig, RoundError};
pub use schedule::{later, schedule, Activity, ClockError, Due, EventQueue, TICK_HOURS};
