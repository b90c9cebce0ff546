use crate::plan::{Action, ActionType, Plan, PlanError};
use serde::{Deserialize, Serialize};

/// Combined effect of every plan task active on one day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSet {
    /// Multiplier on daily contacts, in [0, 1].
    pub contact_scale: f64,
    /// Multiplier on per-contact transmission probability, in [0, 1].
    pub transmission_scale: f64,
    /// Added to the base daily isolation probability, in [0, 1].
    pub extra_isolation_prob: f64,
    pub vaccinations_per_day: u32,
    /// Dose-weighted efficacy of today's vaccinations.
    pub vaccine_efficacy: f64,
}

impl EffectSet {
    pub const IDENTITY: EffectSet = EffectSet {
        contact_scale: 1.0,
        transmission_scale: 1.0,
        extra_isolation_prob: 0.0,
        vaccinations_per_day: 0,
        vaccine_efficacy: 0.0,
    };

    /// Everything shut: no contacts, no transmission.
    pub const LOCKDOWN: EffectSet = EffectSet {
        contact_scale: 0.0,
        transmission_scale: 0.0,
        extra_isolation_prob: 0.0,
        vaccinations_per_day: 0,
        vaccine_efficacy: 0.0,
    };

    pub fn is_identity(&self) -> bool {
        *self == EffectSet::IDENTITY
    }
}

impl Default for EffectSet {
    fn default() -> Self {
        EffectSet::IDENTITY
    }
}

/// Doses a vaccination task hands out on `day`. Spreads `amount` over the
/// task's days so the per-day counts sum to exactly `amount`.
fn doses_on(task: &Action, day: u32) -> u32 {
    let duration = task.duration() as u64;
    let k = (day - task.from_day) as u64;
    let amount = task.amount as u64;
    (amount * (k + 1) / duration - amount * k / duration) as u32
}

/// Canonical order for folding so the result does not depend on task order.
fn fold_key(t: &Action) -> (ActionType, u32, u32, u32, u64, u64) {
    (
        t.action,
        t.from_day,
        t.to_day,
        t.amount,
        t.efficacy.to_bits(),
        t.cost.to_bits(),
    )
}

/// Folds every task of `plan` whose interval contains `day` into one [`EffectSet`].
pub fn effects_for_day(plan: &Plan, day: u32) -> Result<EffectSet, PlanError> {
    for (index, t) in plan.tasks.iter().enumerate() {
        if t.to_day < t.from_day {
            return Err(PlanError::ReversedInterval {
                index,
                from_day: t.from_day,
                to_day: t.to_day,
            });
        }
    }
    let mut active: Vec<&Action> = plan.tasks.iter().filter(|t| t.is_active_on(day)).collect();
    if active.is_empty() {
        return Ok(EffectSet::IDENTITY);
    }
    active.sort_by_key(|t| fold_key(t));

    let mut fx = EffectSet::IDENTITY;
    let mut weighted_efficacy = 0.0;
    for t in active {
        let strength = t.efficacy * t.action.coverage();
        match t.action {
            ActionType::TargetedSocialDistancing | ActionType::MassSocialDistancing => {
                fx.contact_scale *= 1.0 - strength;
            }
            ActionType::Awareness => fx.transmission_scale *= 1.0 - strength,
            ActionType::Quarantining => {
                fx.extra_isolation_prob = (fx.extra_isolation_prob + strength).min(1.0);
            }
            ActionType::TargetedVaccination | ActionType::MassVaccination => {
                let doses = doses_on(t, day);
                fx.vaccinations_per_day += doses;
                weighted_efficacy += doses as f64 * t.efficacy;
            }
        }
    }
    if fx.vaccinations_per_day > 0 {
        fx.vaccine_efficacy = (weighted_efficacy / fx.vaccinations_per_day as f64).min(1.0);
    }
    Ok(fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn task(action: ActionType, from_day: u32, to_day: u32, efficacy: f64) -> Action {
        Action {
            action,
            amount: 100,
            cost: 1.0,
            from_day,
            to_day,
            efficacy,
        }
    }

    fn plan(tasks: Vec<Action>) -> Plan {
        Plan {
            id: 0,
            certainty: 0.0,
            tasks,
        }
    }

    #[test]
    fn empty_plan_is_identity() {
        for day in [0, 7, 50, 1000] {
            assert!(effects_for_day(&Plan::empty(), day).unwrap().is_identity());
        }
    }

    #[test]
    fn quarantine_window() {
        let p = plan(vec![task(ActionType::Quarantining, 29, 31, 0.75)]);
        let coverage = ActionType::Quarantining.coverage();
        let on = effects_for_day(&p, 30).unwrap();
        assert_eq!(on.extra_isolation_prob, 0.75 * coverage);
        assert_eq!(on.contact_scale, 1.0);
        assert!(effects_for_day(&p, 32).unwrap().is_identity());
        assert!(effects_for_day(&p, 28).unwrap().is_identity());
        assert!(!effects_for_day(&p, 29).unwrap().is_identity());
        assert!(!effects_for_day(&p, 31).unwrap().is_identity());
    }

    #[test]
    fn stacked_targeted_distancing() {
        // efficacy 1 with 0.3 coverage scales contacts by 0.7 per task
        let p = plan(vec![
            task(ActionType::TargetedSocialDistancing, 0, 10, 1.0),
            task(ActionType::TargetedSocialDistancing, 5, 20, 1.0),
        ]);
        assert!((effects_for_day(&p, 3).unwrap().contact_scale - 0.7).abs() < 1e-12);
        assert!((effects_for_day(&p, 7).unwrap().contact_scale - 0.49).abs() < 1e-12);
        assert!((effects_for_day(&p, 15).unwrap().contact_scale - 0.7).abs() < 1e-12);
    }

    #[test]
    fn isolation_saturates() {
        let p = plan(vec![
            task(ActionType::Quarantining, 0, 5, 1.0),
            task(ActionType::Quarantining, 0, 5, 1.0),
            task(ActionType::Quarantining, 0, 5, 1.0),
        ]);
        assert_eq!(effects_for_day(&p, 1).unwrap().extra_isolation_prob, 1.0);
    }

    #[test]
    fn vaccination_doses_sum_to_amount() {
        let mut t = task(ActionType::MassVaccination, 3, 9, 0.75);
        t.amount = 100;
        let p = plan(vec![t]);
        let total: u32 = (0..20)
            .map(|d| effects_for_day(&p, d).unwrap().vaccinations_per_day)
            .sum();
        assert_eq!(total, 100);
        assert_eq!(effects_for_day(&p, 4).unwrap().vaccine_efficacy, 0.75);
    }

    #[test]
    fn reversed_interval_is_an_error() {
        let p = plan(vec![task(ActionType::Awareness, 9, 3, 0.5)]);
        assert!(matches!(
            effects_for_day(&p, 5),
            Err(PlanError::ReversedInterval { index: 0, .. })
        ));
    }

    fn any_task() -> impl Strategy<Value = Action> {
        (0usize..6, 0u32..30, 0u32..20, 0u32..500, 0.0f64..=1.0).prop_map(
            |(k, from, len, amount, efficacy)| Action {
                action: ActionType::ALL[k],
                amount,
                cost: amount as f64,
                from_day: from,
                to_day: from + len,
                efficacy,
            },
        )
    }

    proptest! {
        #[test]
        fn folding_ignores_task_order(
            tasks in prop::collection::vec(any_task(), 0..8),
            seed in any::<u64>(),
            day in 0u32..50,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = tasks.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = effects_for_day(&plan(tasks), day).unwrap();
            let b = effects_for_day(&plan(shuffled), day).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn scales_stay_in_unit_interval(
            tasks in prop::collection::vec(any_task(), 0..8),
            day in 0u32..50,
        ) {
            let fx = effects_for_day(&plan(tasks), day).unwrap();
            prop_assert!((0.0..=1.0).contains(&fx.contact_scale));
            prop_assert!((0.0..=1.0).contains(&fx.transmission_scale));
            prop_assert!((0.0..=1.0).contains(&fx.extra_isolation_prob));
            prop_assert!((0.0..=1.0).contains(&fx.vaccine_efficacy));
        }
    }
}
