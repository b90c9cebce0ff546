//! Immune-inspired plan search.
//!
//! Candidate plans are composed from the resource pool (bone marrow), scored
//! by simulating them (affinity), and improved by cloning the better half and
//! hypermutating the clones at an intensity of `1 - affinity`. The search
//! stops as soon as a plan clears the acceptance threshold (positive
//! selection) or the generation budget runs out.

mod affinity;
mod bone_marrow;
mod clonal;

pub use affinity::{evaluate, plan_certainty, successfulness, EvaluationConfig, Evaluator};
pub use bone_marrow::{
    conform, edit_count, generate_plan, mutate, mutate_traced, Edit, MAX_EDIT_DAYS,
};
pub use clonal::{clonal_select, evaluation_budget, ClonalOutcome, ClonalSearch};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchBudget {
    pub generations: usize,
    pub population_size: usize,
    pub clones_per_elite: usize,
    /// Search stops once the best plan reaches this successfulness.
    pub acceptable_successfulness: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            generations: 20,
            population_size: 10,
            clones_per_elite: 3,
            acceptable_successfulness: 0.3,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.generations < 1 {
            return Err("generations must be at least 1");
        }
        if self.population_size < 2 {
            return Err("population_size must be at least 2");
        }
        if self.clones_per_elite < 1 {
            return Err("clones_per_elite must be at least 1");
        }
        if !self.acceptable_successfulness.is_finite() || self.acceptable_successfulness < 0.0 {
            return Err("acceptable_successfulness must be a non-negative number");
        }
        Ok(())
    }
}
