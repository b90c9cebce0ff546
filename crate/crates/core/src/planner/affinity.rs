//! Affinity of a plan against a situation: simulated peak reduction
//! discounted by what the plan costs.

use crate::epidemic::{simulate, summarize, DiseaseParams, World};
use crate::memory::MemoryCase;
use crate::plan::{Plan, PlanError};
use crate::seed;
use crate::situation::Situation;
use serde::{Deserialize, Serialize};

/// How plans are scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    pub disease: DiseaseParams,
    /// Days simulated per evaluation.
    pub horizon: u32,
    /// Base seed of the evaluation stream, distinct from the deployment seed.
    pub seed: u64,
    pub replicates: u32,
    /// Cost at which the score is halved.
    pub cost_scale: f64,
}

/// `max(0, (base - plan) / base) / (1 + cost / cost_scale)`, clamped to [0, 1].
pub fn successfulness(base_peak: f64, plan_peak: f64, cost: f64, cost_scale: f64) -> f64 {
    if base_peak <= 0.0 {
        return 0.0;
    }
    let improvement = ((base_peak - plan_peak) / base_peak).max(0.0);
    let discount = 1.0 / (1.0 + cost.max(0.0) / cost_scale);
    (improvement * discount).clamp(0.0, 1.0)
}

/// Scores plans against one starting situation. The no-plan baseline is
/// simulated once up front.
#[derive(Debug, Clone)]
pub struct Evaluator {
    initial: Situation,
    config: EvaluationConfig,
    baseline_peak: f64,
}

impl Evaluator {
    pub fn new(initial: Situation, config: EvaluationConfig) -> Result<Self, PlanError> {
        let mut evaluator = Evaluator {
            initial,
            config,
            baseline_peak: 0.0,
        };
        evaluator.baseline_peak = evaluator.mean_peak(&Plan::empty())?;
        Ok(evaluator)
    }

    pub fn baseline_peak(&self) -> f64 {
        self.baseline_peak
    }

    pub fn config(&self) -> &EvaluationConfig {
        &self.config
    }

    fn mean_peak(&self, plan: &Plan) -> Result<f64, PlanError> {
        let replicates = self.config.replicates.max(1);
        let mut total = 0.0;
        for r in 0..replicates {
            let world = World::from_situation(
                &self.initial,
                self.config.disease,
                seed::derive(self.config.seed, r as u64),
            );
            let trace = simulate(world, plan, self.config.horizon)?;
            total += summarize(&trace).peak_prevalence;
        }
        Ok(total / replicates as f64)
    }

    /// Successfulness of `plan` in [0, 1]; the empty plan scores exactly 0.
    pub fn score(&self, plan: &Plan) -> Result<f64, PlanError> {
        if plan.tasks.is_empty() {
            return Ok(0.0);
        }
        let peak = self.mean_peak(plan)?;
        Ok(successfulness(
            self.baseline_peak,
            peak,
            plan.total_cost(),
            self.config.cost_scale,
        ))
    }
}

/// One-shot scoring of `plan` from `initial`.
pub fn evaluate(
    plan: &Plan,
    initial: &Situation,
    config: &EvaluationConfig,
) -> Result<f64, PlanError> {
    Evaluator::new(*initial, *config)?.score(plan)
}

/// Confidence in a retrieved plan: its successfulness halved every
/// `match_radius` units of distance. Nothing retrieved means no confidence.
pub fn plan_certainty(retrieved: Option<(&MemoryCase, u64)>, match_radius: u64) -> f64 {
    match retrieved {
        None => 0.0,
        Some((case, distance)) => {
            let radius = match_radius.max(1) as f64;
            (case.successfulness * (-(distance as f64) / radius).exp2()).clamp(0.0, 1.0)
        }
    }
}
