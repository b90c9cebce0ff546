use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Responder roles inside one emergency operations center.
///
/// Declaration order is the tie-break priority for activities sharing a
/// timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Operational,
    TacticalCommunication,
    DecisionMaking,
    Tactical,
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentRole::Operational => "operational",
            AgentRole::TacticalCommunication => "tactical_communication",
            AgentRole::DecisionMaking => "decision_making",
            AgentRole::Tactical => "tactical",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("eoc.{field}: {count} agents configured, {rule}")]
pub struct RoleCountError {
    pub field: &'static str,
    pub count: u32,
    pub rule: &'static str,
}

/// Staffing of one EOC.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EocConfig {
    pub name: String,
    pub city: String,
    pub operational: u32,
    pub tactical: u32,
    pub tactical_communication: u32,
    pub decision_making: u32,
    /// Day the running plan is assessed and, if it falls short, replaced.
    pub checkpoint_day: u32,
}

impl Default for EocConfig {
    fn default() -> Self {
        EocConfig {
            name: "EOC1".into(),
            city: "Cairo".into(),
            operational: 3,
            tactical: 2,
            tactical_communication: 1,
            decision_making: 1,
            checkpoint_day: 25,
        }
    }
}

impl EocConfig {
    /// Exactly one decision maker and one communication agent; at least one
    /// tactical and one operational agent.
    pub fn validate(&self) -> Result<(), RoleCountError> {
        let exactly_one = |field, count| {
            if count == 1 {
                Ok(())
            } else {
                Err(RoleCountError {
                    field,
                    count,
                    rule: "exactly 1 required",
                })
            }
        };
        let at_least_one = |field, count| {
            if count >= 1 {
                Ok(())
            } else {
                Err(RoleCountError {
                    field,
                    count,
                    rule: "at least 1 required",
                })
            }
        };
        exactly_one("decision_making", self.decision_making)?;
        exactly_one("tactical_communication", self.tactical_communication)?;
        at_least_one("tactical", self.tactical)?;
        at_least_one("operational", self.operational)?;
        Ok(())
    }

    pub fn count(&self, role: AgentRole) -> u32 {
        match role {
            AgentRole::Operational => self.operational,
            AgentRole::TacticalCommunication => self.tactical_communication,
            AgentRole::DecisionMaking => self.decision_making,
            AgentRole::Tactical => self.tactical,
        }
    }

    /// Display name of agent `index` of `role`.
    pub fn agent_name(&self, role: AgentRole, index: u32) -> String {
        match role {
            AgentRole::Operational => format!("Operational_{index}_{}", self.name),
            AgentRole::Tactical => format!("Tactical_{index}_{}", self.name),
            AgentRole::TacticalCommunication => {
                format!("TacticalCommunication{index}_{}", self.name)
            }
            AgentRole::DecisionMaking => format!("CrisisManager{index}_{}", self.name),
        }
    }
}
