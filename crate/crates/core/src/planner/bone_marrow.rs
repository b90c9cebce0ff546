//! Plan generation from the gene library and hypermutation of existing plans.

use crate::plan::{task_cost, Action, ActionTemplate, ActionType, Plan, PlanError, ResourcePool};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;

/// Largest shift or resize a single edit applies, in days.
pub const MAX_EDIT_DAYS: i64 = 5;

/// Kind of a single mutation edit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edit {
    Shift,
    Resize,
    Swap,
    Add,
    Remove,
}

fn type_counts(tasks: &[Action]) -> BTreeMap<ActionType, u32> {
    let mut counts = BTreeMap::new();
    for t in tasks {
        *counts.entry(t.action).or_insert(0) += 1;
    }
    counts
}

fn templates_with_room<'p>(pool: &'p ResourcePool, tasks: &[Action]) -> Vec<&'p ActionTemplate> {
    let counts = type_counts(tasks);
    pool.templates
        .iter()
        .filter(|t| counts.get(&t.action).copied().unwrap_or(0) < t.max_tasks)
        .collect()
}

fn random_interval<R: Rng + ?Sized>(horizon: u32, rng: &mut R) -> (u32, u32) {
    let from = rng.gen_range(0..=horizon);
    let to = rng.gen_range(from..=horizon);
    (from, to)
}

fn new_task<R: Rng + ?Sized>(template: &ActionTemplate, horizon: u32, rng: &mut R) -> Action {
    let (from_day, to_day) = random_interval(horizon, rng);
    let amount = template.draw_amount(rng);
    Action {
        action: template.action,
        amount,
        cost: task_cost(
            template.action,
            template.unit_cost,
            amount,
            from_day,
            to_day,
        ),
        from_day,
        to_day,
        efficacy: template.efficacy,
    }
}

fn reprice(task: &mut Action, pool: &ResourcePool) {
    if let Some(t) = pool.template(task.action) {
        task.cost = task_cost(
            task.action,
            t.unit_cost,
            task.amount,
            task.from_day,
            task.to_day,
        );
    }
}

/// Draws a fresh plan of 1..=`pool.max_tasks()` tasks over `[0, horizon]`.
pub fn generate_plan<R: Rng + ?Sized>(
    pool: &ResourcePool,
    horizon: u32,
    rng: &mut R,
) -> Result<Plan, PlanError> {
    if pool.is_empty() {
        return Err(PlanError::EmptyPool);
    }
    let n = rng.gen_range(1..=pool.max_tasks().max(1));
    let mut tasks = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let room = templates_with_room(pool, &tasks);
        let Some(&template) = room.choose(rng) else {
            break;
        };
        tasks.push(new_task(template, horizon, rng));
    }
    Ok(Plan {
        id: 0,
        certainty: 0.0,
        tasks,
    })
}

/// Fits a plan from elsewhere (another round, another pool) to `pool` and
/// `horizon`: drops unknown action types and tasks over the per-type limit,
/// caps amounts, clips intervals and reprices at the pool's unit costs.
pub fn conform(plan: &Plan, pool: &ResourcePool, horizon: u32) -> Plan {
    let mut counts: BTreeMap<ActionType, u32> = BTreeMap::new();
    let mut tasks = Vec::new();
    for t in &plan.tasks {
        let Some(template) = pool.template(t.action) else {
            continue;
        };
        let n = counts.entry(t.action).or_insert(0);
        if *n >= template.max_tasks || t.from_day > horizon {
            continue;
        }
        *n += 1;
        let mut t = t.clone();
        t.to_day = t.to_day.min(horizon).max(t.from_day);
        t.amount = t.amount.clamp(1, template.per_task_cap());
        t.efficacy = template.efficacy;
        reprice(&mut t, pool);
        tasks.push(t);
    }
    Plan {
        id: plan.id,
        certainty: plan.certainty,
        tasks,
    }
}

/// Number of edits a mutation of `tasks` tasks at `intensity` applies.
pub fn edit_count(intensity: f64, tasks: usize) -> usize {
    let raw = intensity.clamp(0.0, 1.0) * tasks as f64;
    // guard against 0.3 * 10 = 3.0000000000000004
    (raw - 1e-9).ceil().max(0.0) as usize
}

/// Applies `ceil(intensity * tasks)` random edits. See [`mutate_traced`].
pub fn mutate<R: Rng + ?Sized>(
    plan: &Plan,
    pool: &ResourcePool,
    horizon: u32,
    intensity: f64,
    rng: &mut R,
) -> Plan {
    mutate_traced(plan, pool, horizon, intensity, rng).0
}

/// Mutates `plan` and reports the edits applied, in order.
///
/// Each edit is drawn uniformly among the kinds applicable to the current
/// plan: shift an interval, grow or shrink one end, swap the action type for
/// another pool type with room left, add a task, or remove one (never
/// leaving the plan empty).
pub fn mutate_traced<R: Rng + ?Sized>(
    plan: &Plan,
    pool: &ResourcePool,
    horizon: u32,
    intensity: f64,
    rng: &mut R,
) -> (Plan, Vec<Edit>) {
    let edits = edit_count(intensity, plan.tasks.len());
    let mut out = plan.clone();
    let mut applied = Vec::with_capacity(edits);
    for _ in 0..edits {
        let mut kinds = Vec::with_capacity(5);
        if !out.tasks.is_empty() {
            kinds.extend([Edit::Shift, Edit::Resize]);
            if !swap_candidates(&out.tasks, pool).is_empty() {
                kinds.push(Edit::Swap);
            }
        }
        if !templates_with_room(pool, &out.tasks).is_empty() {
            kinds.push(Edit::Add);
        }
        if out.tasks.len() > 1 {
            kinds.push(Edit::Remove);
        }
        let Some(&kind) = kinds.choose(rng) else {
            break;
        };
        apply(kind, &mut out.tasks, pool, horizon, rng);
        applied.push(kind);
    }
    (out, applied)
}

fn swap_candidates(tasks: &[Action], pool: &ResourcePool) -> Vec<(usize, Vec<ActionType>)> {
    let room: Vec<ActionType> = templates_with_room(pool, tasks)
        .iter()
        .map(|t| t.action)
        .collect();
    tasks
        .iter()
        .enumerate()
        .filter_map(|(k, t)| {
            let alternatives: Vec<ActionType> =
                room.iter().copied().filter(|&a| a != t.action).collect();
            (!alternatives.is_empty()).then_some((k, alternatives))
        })
        .collect()
}

fn signed_delta<R: Rng + ?Sized>(rng: &mut R) -> i64 {
    let magnitude = rng.gen_range(1..=MAX_EDIT_DAYS);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn apply<R: Rng + ?Sized>(
    kind: Edit,
    tasks: &mut Vec<Action>,
    pool: &ResourcePool,
    horizon: u32,
    rng: &mut R,
) {
    let h = horizon as i64;
    match kind {
        Edit::Shift => {
            let k = rng.gen_range(0..tasks.len());
            let delta = signed_delta(rng);
            let t = &mut tasks[k];
            let span = (t.to_day - t.from_day) as i64;
            let from = (t.from_day as i64 + delta).clamp(0, (h - span).max(0));
            t.from_day = from as u32;
            t.to_day = (from + span).min(h) as u32;
            reprice(t, pool);
        }
        Edit::Resize => {
            let k = rng.gen_range(0..tasks.len());
            let delta = signed_delta(rng);
            let move_end = rng.gen_bool(0.5);
            let t = &mut tasks[k];
            if move_end {
                t.to_day = (t.to_day as i64 + delta).clamp(t.from_day as i64, h) as u32;
            } else {
                t.from_day = (t.from_day as i64 + delta).clamp(0, t.to_day as i64) as u32;
            }
            reprice(t, pool);
        }
        Edit::Swap => {
            let candidates = swap_candidates(tasks, pool);
            let (k, alternatives) = candidates.choose(rng).expect("swap checked feasible");
            let action = *alternatives.choose(rng).expect("non-empty alternatives");
            let template = pool.template(action).expect("alternative comes from pool");
            let t = &mut tasks[*k];
            t.action = action;
            t.amount = template.draw_amount(rng);
            t.efficacy = template.efficacy;
            reprice(t, pool);
        }
        Edit::Add => {
            let room = templates_with_room(pool, tasks);
            let template = *room.choose(rng).expect("add checked feasible");
            tasks.push(new_task(template, horizon, rng));
        }
        Edit::Remove => {
            let k = rng.gen_range(0..tasks.len());
            tasks.remove(k);
        }
    }
}
