//! Seeded agent-based disease dynamics over a closed population.
//!
//! The model steps once per day. Susceptible agents become in-contact with
//! probability `1 - (1 - p * ts)^(c * cs * I / N_alive)`, where `p` is the
//! per-contact transmission probability, `c` the daily contacts, `I` the
//! non-isolated infectious count, and `ts` / `cs` the plan's scale factors.
//! In-contact agents turn infectious after a fixed incubation, infectious
//! agents may be isolated each day, and both leave after a fixed infectious
//! period, dying with the case-fatality probability.

mod effects;
mod trace;
mod world;

pub use effects::{effects_for_day, EffectSet};
pub use trace::{summarize, EpidemicTrace, TraceError, TraceSummary};
pub use world::{census, step_day, DiseaseParams, ParamError, Person, World, TICKS_PER_DAY};

use crate::plan::{Plan, PlanError};
use serde::{Deserialize, Serialize};

/// Everything a bare epidemic round needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundSetup {
    pub population: u32,
    pub initial_infected: u32,
    pub duration_days: u32,
    pub seed: u64,
    pub disease: DiseaseParams,
}

/// Runs `duration_days` days from a fresh world under `plan`.
pub fn run_round(setup: &RoundSetup, plan: &Plan) -> Result<EpidemicTrace, PlanError> {
    let world = World::new(
        setup.population,
        setup.initial_infected,
        setup.disease,
        setup.seed,
    );
    simulate(world, plan, setup.duration_days)
}

/// Steps `world` for `days` days applying the effects of `plan`, where plan
/// day `d` drives the step from day `d` to day `d + 1`. Day 0 of the trace is
/// the census of `world` as given.
pub fn simulate(mut world: World, plan: &Plan, days: u32) -> Result<EpidemicTrace, PlanError> {
    let mut trace = EpidemicTrace::new(world.population(), plan.total_cost());
    trace.push(world.census());
    for day in 0..days {
        let fx = effects_for_day(plan, day)?;
        world.advance(&fx);
        trace.push(world.census());
    }
    Ok(trace)
}
