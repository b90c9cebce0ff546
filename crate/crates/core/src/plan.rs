//! Control strategies, plans built from them, and the resource pool they are drawn from.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("task {index}: interval {from_day}..{to_day} is reversed")]
    ReversedInterval {
        index: usize,
        from_day: u32,
        to_day: u32,
    },
    #[error("task {index}: to_day {to_day} is beyond horizon {horizon}")]
    BeyondHorizon {
        index: usize,
        to_day: u32,
        horizon: u32,
    },
    #[error("task {index}: efficacy {efficacy} outside [0, 1]")]
    Efficacy { index: usize, efficacy: f64 },
    #[error("task {index}: cost {cost} is negative or not finite")]
    Cost { index: usize, cost: f64 },
    #[error("plan certainty {0} outside [0, 1]")]
    Certainty(f64),
    #[error("resource pool is empty")]
    EmptyPool,
    #[error("resource pool template {action}: {reason}")]
    Template { action: ActionType, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ActionType {
    TargetedSocialDistancing,
    MassSocialDistancing,
    TargetedVaccination,
    MassVaccination,
    Quarantining,
    Awareness,
}

impl ActionType {
    pub const ALL: [ActionType; 6] = [
        ActionType::TargetedSocialDistancing,
        ActionType::MassSocialDistancing,
        ActionType::TargetedVaccination,
        ActionType::MassVaccination,
        ActionType::Quarantining,
        ActionType::Awareness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActionType::TargetedSocialDistancing => "TARGETED_SOCIAL_DISTANCING",
            ActionType::MassSocialDistancing => "MASS_SOCIAL_DISTANCING",
            ActionType::TargetedVaccination => "TARGETED_VACCINATION",
            ActionType::MassVaccination => "MASS_VACCINATION",
            ActionType::Quarantining => "QUARANTINING",
            ActionType::Awareness => "AWARENESS",
        }
    }

    /// Share of the relevant subpopulation an action reaches.
    ///
    /// Mass actions reach everyone, targeted ones 30%. Quarantining and
    /// awareness campaigns carry no qualifier and sit in between.
    pub fn coverage(self) -> f64 {
        match self {
            ActionType::MassSocialDistancing | ActionType::MassVaccination => 1.0,
            ActionType::TargetedSocialDistancing | ActionType::TargetedVaccination => 0.3,
            ActionType::Quarantining | ActionType::Awareness => 0.5,
        }
    }

    /// Vaccination batches are paid once; everything else is paid per day.
    pub fn is_one_shot(self) -> bool {
        matches!(
            self,
            ActionType::TargetedVaccination | ActionType::MassVaccination
        )
    }
}

impl fmt::Display for ActionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One timed control strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub action: ActionType,
    pub amount: u32,
    pub cost: f64,
    pub from_day: u32,
    pub to_day: u32,
    pub efficacy: f64,
}

impl Action {
    /// Number of days the task is active, both ends inclusive.
    pub fn duration(&self) -> u32 {
        self.to_day.saturating_sub(self.from_day) + 1
    }

    pub fn is_active_on(&self, day: u32) -> bool {
        self.from_day <= day && day <= self.to_day
    }
}

/// Cost of running `action_type` over `[from_day, to_day]` with `amount` units.
pub fn task_cost(
    action_type: ActionType,
    unit_cost: f64,
    amount: u32,
    from_day: u32,
    to_day: u32,
) -> f64 {
    if action_type.is_one_shot() {
        unit_cost * amount as f64
    } else {
        unit_cost * amount as f64 * (to_day.saturating_sub(from_day) + 1) as f64
    }
}

/// A course of actions: an identified, certainty-scored set of tasks.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub id: u64,
    pub certainty: f64,
    pub tasks: Vec<Action>,
}

impl Plan {
    pub fn empty() -> Self {
        Plan::default()
    }

    pub fn total_cost(&self) -> f64 {
        // fold from +0.0: an empty f64 sum is -0.0
        self.tasks.iter().fold(0.0, |acc, t| acc + t.cost)
    }

    /// Checks task intervals against `horizon` and all value ranges.
    pub fn validate(&self, horizon: u32) -> Result<(), PlanError> {
        if !(0.0..=1.0).contains(&self.certainty) {
            return Err(PlanError::Certainty(self.certainty));
        }
        for (index, t) in self.tasks.iter().enumerate() {
            if t.to_day < t.from_day {
                return Err(PlanError::ReversedInterval {
                    index,
                    from_day: t.from_day,
                    to_day: t.to_day,
                });
            }
            if t.to_day > horizon {
                return Err(PlanError::BeyondHorizon {
                    index,
                    to_day: t.to_day,
                    horizon,
                });
            }
            if !(0.0..=1.0).contains(&t.efficacy) {
                return Err(PlanError::Efficacy {
                    index,
                    efficacy: t.efficacy,
                });
            }
            if !t.cost.is_finite() || t.cost < 0.0 {
                return Err(PlanError::Cost {
                    index,
                    cost: t.cost,
                });
            }
        }
        Ok(())
    }

    /// Moves every task `offset` days later, dropping tasks that start after
    /// `horizon` and clipping the rest to it.
    pub fn shifted(&self, offset: u32, horizon: u32, pool: Option<&ResourcePool>) -> Plan {
        let tasks = self
            .tasks
            .iter()
            .filter(|t| t.from_day + offset <= horizon)
            .map(|t| {
                let mut t = t.clone();
                let old_duration = t.duration();
                t.from_day += offset;
                t.to_day = (t.to_day + offset).min(horizon);
                if t.duration() != old_duration {
                    t.cost = rescale_cost(&t, old_duration, pool);
                }
                t
            })
            .collect();
        Plan {
            id: self.id,
            certainty: self.certainty,
            tasks,
        }
    }
}

fn rescale_cost(task: &Action, old_duration: u32, pool: Option<&ResourcePool>) -> f64 {
    if let Some(template) = pool.and_then(|p| p.template(task.action)) {
        return task_cost(
            task.action,
            template.unit_cost,
            task.amount,
            task.from_day,
            task.to_day,
        );
    }
    if task.action.is_one_shot() {
        task.cost
    } else {
        task.cost * task.duration() as f64 / old_duration as f64
    }
}

/// What the pool offers for one action type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionTemplate {
    pub action: ActionType,
    /// Total units (persons or doses) available across all tasks of this type.
    pub available: u32,
    pub unit_cost: f64,
    pub efficacy: f64,
    /// Upper bound on the number of tasks of this type in one plan.
    pub max_tasks: u32,
}

impl ActionTemplate {
    /// Largest amount a single task may claim so that a full complement of
    /// `max_tasks` tasks never exceeds `available`.
    pub fn per_task_cap(&self) -> u32 {
        (self.available / self.max_tasks.max(1)).max(1)
    }

    pub fn draw_amount<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(1..=self.per_task_cap())
    }
}

/// The gene library plans are composed from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourcePool {
    pub templates: Vec<ActionTemplate>,
}

impl ResourcePool {
    pub fn new(templates: Vec<ActionTemplate>) -> Result<Self, PlanError> {
        let pool = ResourcePool { templates };
        pool.validate()?;
        Ok(pool)
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        let mut seen = BTreeMap::new();
        for t in &self.templates {
            let bad = |reason: &str| PlanError::Template {
                action: t.action,
                reason: reason.to_string(),
            };
            if seen.insert(t.action, ()).is_some() {
                return Err(bad("listed twice"));
            }
            if !(0.0..=1.0).contains(&t.efficacy) {
                return Err(bad("efficacy outside [0, 1]"));
            }
            if !t.unit_cost.is_finite() || t.unit_cost < 0.0 {
                return Err(bad("unit cost negative"));
            }
            if t.max_tasks == 0 {
                return Err(bad("max_tasks must be at least 1"));
            }
            if t.available == 0 {
                return Err(bad("nothing available"));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn template(&self, action: ActionType) -> Option<&ActionTemplate> {
        self.templates.iter().find(|t| t.action == action)
    }

    /// Largest number of tasks any plan drawn from this pool may hold.
    pub fn max_tasks(&self) -> u32 {
        self.templates.iter().map(|t| t.max_tasks).sum()
    }

    /// Whether every task's type exists in the pool, per-type task counts
    /// respect `max_tasks`, and per-type amounts fit in `available`.
    pub fn admits(&self, plan: &Plan) -> bool {
        let mut counts: BTreeMap<ActionType, (u32, u64)> = BTreeMap::new();
        for t in &plan.tasks {
            let e = counts.entry(t.action).or_default();
            e.0 += 1;
            e.1 += t.amount as u64;
        }
        counts
            .iter()
            .all(|(action, &(n, amount))| match self.template(*action) {
                Some(t) => n <= t.max_tasks && amount <= t.available as u64,
                None => false,
            })
    }
}

/// Inclusive range used by randomly generated pools.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Span<T> {
    pub min: T,
    pub max: T,
}

/// Ranges one action type's template is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateRanges {
    pub action: ActionType,
    pub available: Span<u32>,
    pub unit_cost: Span<f64>,
    pub max_tasks: Span<u32>,
}

/// Recipe for a randomly generated pool with a fixed efficacy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPoolSpec {
    pub efficacy: f64,
    pub ranges: Vec<TemplateRanges>,
}

impl RandomPoolSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.efficacy) {
            return Err("efficacy must lie in [0, 1]".into());
        }
        if self.ranges.is_empty() {
            return Err("at least one action range is required".into());
        }
        for r in &self.ranges {
            if r.available.min == 0 || r.available.min > r.available.max {
                return Err(format!("{}: available range invalid", r.action));
            }
            if !(r.unit_cost.min >= 0.0 && r.unit_cost.min <= r.unit_cost.max) {
                return Err(format!("{}: unit_cost range invalid", r.action));
            }
            if r.max_tasks.min == 0 || r.max_tasks.min > r.max_tasks.max {
                return Err(format!("{}: max_tasks range invalid", r.action));
            }
        }
        Ok(())
    }

    /// Draws one template per configured action type, in listed order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ResourcePool {
        let templates = self
            .ranges
            .iter()
            .map(|r| ActionTemplate {
                action: r.action,
                available: rng.gen_range(r.available.min..=r.available.max),
                unit_cost: if r.unit_cost.min < r.unit_cost.max {
                    rng.gen_range(r.unit_cost.min..r.unit_cost.max)
                } else {
                    r.unit_cost.min
                },
                efficacy: self.efficacy,
                max_tasks: rng.gen_range(r.max_tasks.min..=r.max_tasks.max),
            })
            .collect();
        ResourcePool { templates }
    }
}
