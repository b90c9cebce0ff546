//! Population census snapshots and the self / non-self test applied to them.
//!
//! A [`Situation`] is the pattern the planner reacts to: how many agents sit
//! in each of the seven health states at a given tick. Similarity between
//! situations is the city-block (L1) distance over those seven counts.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Health state of a single person agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HealthState {
    Susceptible,
    InContact,
    Infectious,
    IsolatedInfected,
    Recovered,
    Immunized,
    Dead,
}

impl HealthState {
    pub const ALL: [HealthState; 7] = [
        HealthState::Susceptible,
        HealthState::InContact,
        HealthState::Infectious,
        HealthState::IsolatedInfected,
        HealthState::Recovered,
        HealthState::Immunized,
        HealthState::Dead,
    ];

    /// Column label used in traces and memory dumps.
    pub fn short(self) -> &'static str {
        match self {
            HealthState::Susceptible => "S",
            HealthState::InContact => "E",
            HealthState::Infectious => "I",
            HealthState::IsolatedInfected => "II",
            HealthState::Recovered => "R",
            HealthState::Immunized => "IM",
            HealthState::Dead => "D",
        }
    }

    /// R, IM and D are never left once entered.
    pub fn is_absorbing(self) -> bool {
        matches!(
            self,
            HealthState::Recovered | HealthState::Immunized | HealthState::Dead
        )
    }

    /// Whether `self -> next` is one of the legal disease transitions.
    pub fn can_transition_to(self, next: HealthState) -> bool {
        use HealthState::*;
        matches!(
            (self, next),
            (Susceptible, InContact)
                | (Susceptible, Immunized)
                | (InContact, Infectious)
                | (Infectious, IsolatedInfected)
                | (Infectious, Recovered)
                | (Infectious, Dead)
                | (IsolatedInfected, Recovered)
                | (IsolatedInfected, Dead)
        )
    }
}

impl fmt::Display for HealthState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Census of the population over the seven health states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Situation {
    pub s: u32,
    pub e: u32,
    pub i: u32,
    pub ii: u32,
    pub r: u32,
    pub im: u32,
    pub d: u32,
    /// Clock tick (2-hour units) the census was taken at.
    #[serde(default)]
    pub tick: u64,
}

impl Situation {
    pub fn from_counts(counts: [u32; 7]) -> Self {
        let [s, e, i, ii, r, im, d] = counts;
        Situation {
            s,
            e,
            i,
            ii,
            r,
            im,
            d,
            tick: 0,
        }
    }

    pub fn with_tick(mut self, tick: u64) -> Self {
        self.tick = tick;
        self
    }

    pub fn counts(&self) -> [u32; 7] {
        [self.s, self.e, self.i, self.ii, self.r, self.im, self.d]
    }

    pub fn count(&self, state: HealthState) -> u32 {
        self.counts()[state as usize]
    }

    pub fn count_mut(&mut self, state: HealthState) -> &mut u32 {
        match state {
            HealthState::Susceptible => &mut self.s,
            HealthState::InContact => &mut self.e,
            HealthState::Infectious => &mut self.i,
            HealthState::IsolatedInfected => &mut self.ii,
            HealthState::Recovered => &mut self.r,
            HealthState::Immunized => &mut self.im,
            HealthState::Dead => &mut self.d,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts().iter().map(|&c| c as u64).sum()
    }

    /// Currently infectious agents, isolated or not.
    pub fn active_infections(&self) -> u32 {
        self.i + self.ii
    }

    /// Agents with any ongoing infection (E + I + II).
    pub fn ongoing_infections(&self) -> u32 {
        self.e + self.i + self.ii
    }

    /// Agents that have ever been infected.
    pub fn ever_infected(&self) -> u32 {
        self.e + self.i + self.ii + self.r + self.d
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S:{} E:{} I:{} II:{} R:{} IM:{} D:{}",
            self.s, self.e, self.i, self.ii, self.r, self.im, self.d
        )
    }
}

/// City-block distance between two situations. The timestamp is ignored.
pub fn distance(a: &Situation, b: &Situation) -> u64 {
    a.counts()
        .iter()
        .zip(b.counts())
        .map(|(&x, y)| (x as i64 - y as i64).unsigned_abs())
        .sum()
}

/// Criterion separating acceptable ("self") from undesired situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelfPolicy {
    pub nonself_infection_threshold: u32,
}

impl Default for SelfPolicy {
    fn default() -> Self {
        SelfPolicy {
            nonself_infection_threshold: 1,
        }
    }
}

/// True when the ongoing infection count reaches the policy threshold.
pub fn is_nonself(s: &Situation, policy: &SelfPolicy) -> bool {
    s.ongoing_infections() >= policy.nonself_infection_threshold
}
