use super::effects::EffectSet;
use crate::situation::{HealthState, Situation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Clock ticks per simulated day (the EOC clock runs in 2-hour steps).
pub const TICKS_PER_DAY: u64 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("{field}: {reason}")]
    OutOfRange {
        field: &'static str,
        reason: &'static str,
    },
}

/// Disease parameters of the daily transition model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiseaseParams {
    pub contacts_per_day: f64,
    pub transmission_prob: f64,
    pub incubation_days: u32,
    pub infectious_days: u32,
    pub base_isolation_prob: f64,
    pub case_fatality: f64,
}

impl Default for DiseaseParams {
    /// Calibrated so the uncontrolled 1000-agent outbreak peaks around day 10
    /// with roughly 61% of agents infectious.
    fn default() -> Self {
        DiseaseParams {
            contacts_per_day: 12.0,
            transmission_prob: 0.1875,
            incubation_days: 1,
            infectious_days: 3,
            base_isolation_prob: 0.05,
            case_fatality: 0.03,
        }
    }
}

impl DiseaseParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let unit = |field, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ParamError::OutOfRange {
                    field,
                    reason: "must lie in [0, 1]",
                })
            }
        };
        if !(self.contacts_per_day >= 0.0 && self.contacts_per_day.is_finite()) {
            return Err(ParamError::OutOfRange {
                field: "contacts_per_day",
                reason: "must be a finite non-negative number",
            });
        }
        unit("transmission_prob", self.transmission_prob)?;
        unit("base_isolation_prob", self.base_isolation_prob)?;
        unit("case_fatality", self.case_fatality)?;
        if self.incubation_days == 0 {
            return Err(ParamError::OutOfRange {
                field: "incubation_days",
                reason: "must be at least 1",
            });
        }
        if self.infectious_days == 0 {
            return Err(ParamError::OutOfRange {
                field: "infectious_days",
                reason: "must be at least 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Person {
    pub id: u32,
    pub state: HealthState,
    /// Days in the current state. Isolated cases keep counting from when
    /// they became infectious so isolation does not extend the illness.
    pub days_in_state: u32,
}

/// Closed population stepped one day at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub tick: u64,
    pub persons: Vec<Person>,
    pub params: DiseaseParams,
    rng: ChaCha8Rng,
}

impl World {
    /// `initial_infected` infectious agents (ids `0..initial_infected`), the
    /// rest susceptible.
    pub fn new(population: u32, initial_infected: u32, params: DiseaseParams, seed: u64) -> Self {
        let mut counts = [0u32; 7];
        let infected = initial_infected.min(population);
        counts[HealthState::Infectious as usize] = infected;
        counts[HealthState::Susceptible as usize] = population - infected;
        // infectious agents first so they get the lowest ids
        let order = [
            HealthState::Infectious,
            HealthState::Susceptible,
            HealthState::InContact,
            HealthState::IsolatedInfected,
            HealthState::Recovered,
            HealthState::Immunized,
            HealthState::Dead,
        ];
        World::populate(&counts, &order, params, seed)
    }

    /// Rebuilds a population matching a census. Every agent starts its
    /// current state fresh (`days_in_state` = 0).
    pub fn from_situation(situation: &Situation, params: DiseaseParams, seed: u64) -> Self {
        let mut world = World::populate(&situation.counts(), &HealthState::ALL, params, seed);
        world.tick = situation.tick;
        world
    }

    fn populate(
        counts: &[u32; 7],
        order: &[HealthState; 7],
        params: DiseaseParams,
        seed: u64,
    ) -> Self {
        let mut persons = Vec::with_capacity(counts.iter().map(|&c| c as usize).sum());
        for &state in order {
            for _ in 0..counts[state as usize] {
                persons.push(Person {
                    id: persons.len() as u32,
                    state,
                    days_in_state: 0,
                });
            }
        }
        World {
            tick: 0,
            persons,
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn population(&self) -> u32 {
        self.persons.len() as u32
    }

    pub fn day(&self) -> u32 {
        (self.tick / TICKS_PER_DAY) as u32
    }

    pub fn census(&self) -> Situation {
        census(self)
    }

    /// Advances one day in place. See [`step_day`].
    pub fn advance(&mut self, effects: &EffectSet) {
        self.vaccinate(effects);

        let p = &self.params;
        let alive = self
            .persons
            .iter()
            .filter(|x| x.state != HealthState::Dead)
            .count();
        let infectious = self
            .persons
            .iter()
            .filter(|x| x.state == HealthState::Infectious)
            .count();
        let infection_prob = if alive == 0 || infectious == 0 {
            0.0
        } else {
            let exposures =
                p.contacts_per_day * effects.contact_scale * infectious as f64 / alive as f64;
            let per_contact = (p.transmission_prob * effects.transmission_scale).clamp(0.0, 1.0);
            1.0 - (1.0 - per_contact).powf(exposures)
        };
        let isolation_prob = (p.base_isolation_prob + effects.extra_isolation_prob).min(1.0);
        let (incubation, infectious_days, fatality) =
            (p.incubation_days, p.infectious_days, p.case_fatality);

        for person in self.persons.iter_mut() {
            match person.state {
                HealthState::Susceptible => {
                    if self.rng.gen::<f64>() < infection_prob {
                        person.state = HealthState::InContact;
                        person.days_in_state = 0;
                    }
                }
                HealthState::InContact => {
                    person.days_in_state += 1;
                    if person.days_in_state >= incubation {
                        person.state = HealthState::Infectious;
                        person.days_in_state = 0;
                    }
                }
                HealthState::Infectious | HealthState::IsolatedInfected => {
                    person.days_in_state += 1;
                    let u: f64 = self.rng.gen();
                    if person.days_in_state >= infectious_days {
                        person.state = if u < fatality {
                            HealthState::Dead
                        } else {
                            HealthState::Recovered
                        };
                        person.days_in_state = 0;
                    } else if person.state == HealthState::Infectious && u < isolation_prob {
                        person.state = HealthState::IsolatedInfected;
                    }
                }
                HealthState::Recovered | HealthState::Immunized | HealthState::Dead => {}
            }
        }
        self.tick += TICKS_PER_DAY;
    }

    /// Picks today's vaccinees uniformly among susceptibles (partial
    /// Fisher-Yates), then draws one efficacy trial per dose.
    fn vaccinate(&mut self, effects: &EffectSet) {
        if effects.vaccinations_per_day == 0 {
            return;
        }
        let mut susceptible: Vec<usize> = self
            .persons
            .iter()
            .enumerate()
            .filter(|(_, x)| x.state == HealthState::Susceptible)
            .map(|(k, _)| k)
            .collect();
        let doses = (effects.vaccinations_per_day as usize).min(susceptible.len());
        for k in 0..doses {
            let j = self.rng.gen_range(k..susceptible.len());
            susceptible.swap(k, j);
        }
        for &idx in &susceptible[..doses] {
            if self.rng.gen::<f64>() < effects.vaccine_efficacy {
                let person = &mut self.persons[idx];
                person.state = HealthState::Immunized;
                person.days_in_state = 0;
            }
        }
    }
}

/// Per-state head count of the world, stamped with its tick.
pub fn census(world: &World) -> Situation {
    let mut s = Situation::default().with_tick(world.tick);
    for person in &world.persons {
        *s.count_mut(person.state) += 1;
    }
    s
}

/// One day of the transition model.
///
/// Random draws are consumed in a fixed order: first the vaccination draws
/// (one index pick per dose, then one efficacy trial per dose), then one pass
/// over agents in id order where each susceptible draws once for infection and
/// each infectious or isolated agent draws once (fatality on exit, otherwise
/// the isolation trial). In-contact and absorbed agents draw nothing.
pub fn step_day(mut world: World, effects: &EffectSet) -> World {
    world.advance(effects);
    world
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DiseaseParams {
        DiseaseParams::default()
    }

    #[test]
    fn initial_census() {
        let w = World::new(1000, 3, params(), 1);
        assert_eq!(w.census(), Situation::from_counts([997, 0, 3, 0, 0, 0, 0]));
    }

    #[test]
    fn empty_world() {
        let w = World::new(0, 0, params(), 1);
        assert_eq!(w.census(), Situation::default());
        let w = step_day(w, &EffectSet::IDENTITY);
        assert_eq!(w.census().total(), 0);
    }

    #[test]
    fn all_dead_world_stays_dead() {
        let mut w = World::new(50, 5, params(), 1);
        for p in w.persons.iter_mut() {
            p.state = HealthState::Dead;
        }
        assert_eq!(w.census().counts(), [0, 0, 0, 0, 0, 0, 50]);
        let w = step_day(w, &EffectSet::IDENTITY);
        assert_eq!(w.census().counts(), [0, 0, 0, 0, 0, 0, 50]);
    }

    #[test]
    fn no_infection_pressure_is_a_no_op() {
        let s = Situation::from_counts([500, 0, 0, 0, 300, 150, 50]);
        let w = World::from_situation(&s, params(), 9);
        let next = step_day(w, &EffectSet::IDENTITY);
        assert_eq!(next.census().counts(), s.counts());
    }

    #[test]
    fn saturated_transmission_infects_everyone() {
        let disease = DiseaseParams {
            contacts_per_day: 1000.0,
            transmission_prob: 1.0,
            ..params()
        };
        let s = Situation::from_counts([10, 0, 10, 0, 0, 0, 0]);
        let next = step_day(World::from_situation(&s, disease, 3), &EffectSet::IDENTITY);
        assert_eq!(next.census().s, 0);
        assert_eq!(next.census().e, 10);
    }

    #[test]
    fn stepping_is_deterministic() {
        let a = World::new(1000, 30, params(), 77);
        let b = a.clone();
        let (mut a, mut b) = (a, b);
        for _ in 0..20 {
            a = step_day(a, &EffectSet::IDENTITY);
            b = step_day(b, &EffectSet::IDENTITY);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn lockdown_blocks_new_contacts() {
        let mut w = World::new(1000, 30, params(), 5);
        for _ in 0..30 {
            let before = w.census().s;
            w = step_day(w, &EffectSet::LOCKDOWN);
            assert_eq!(w.census().s, before);
        }
    }

    #[test]
    fn vaccination_moves_susceptibles_to_immunized() {
        let fx = EffectSet {
            vaccinations_per_day: 100,
            vaccine_efficacy: 1.0,
            ..EffectSet::IDENTITY
        };
        let w = step_day(World::new(1000, 0, params(), 2), &fx);
        assert_eq!(w.census().im, 100);
        assert_eq!(w.census().s, 900);
    }

    #[test]
    fn illness_runs_its_course() {
        let disease = DiseaseParams {
            case_fatality: 0.0,
            base_isolation_prob: 0.0,
            contacts_per_day: 0.0,
            ..params()
        };
        let mut w = World::new(10, 10, disease, 1);
        for _ in 0..disease.infectious_days {
            w = step_day(w, &EffectSet::IDENTITY);
        }
        assert_eq!(w.census().r, 10);
    }

    #[test]
    fn params_validation() {
        assert!(params().validate().is_ok());
        let bad = DiseaseParams {
            transmission_prob: 1.2,
            ..params()
        };
        assert!(bad.validate().is_err());
        let bad = DiseaseParams {
            incubation_days: 0,
            ..params()
        };
        assert!(bad.validate().is_err());
    }
}
