//! One-dimensional calibration of the transmission probability against a
//! target baseline outbreak.

use crate::epidemic::{run_round, summarize, RoundSetup};
use crate::plan::Plan;
use thiserror::Error;

/// Stop once the mean peak prevalence is this close to the target.
pub const PREVALENCE_TOLERANCE: f64 = 0.02;
pub const MAX_ITERATIONS: u32 = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationTarget {
    pub peak_day: f64,
    pub peak_prevalence: f64,
}

/// Mean baseline statistics over seeded replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineStats {
    pub mean_peak_day: f64,
    pub mean_peak_prevalence: f64,
    pub mean_attack_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub transmission_prob: f64,
    pub stats: BaselineStats,
    pub iterations: u32,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrationError {
    #[error("target {field} must be positive")]
    NonPositive { field: &'static str },
    #[error(
        "target peak prevalence {target} is outside the reachable range [{low:.4}, {high:.4}]"
    )]
    NotBracketed { target: f64, low: f64, high: f64 },
    #[error("replicates must be at least 1")]
    NoReplicates,
}

/// Runs `replicates` no-control rounds with seeds `setup.seed + r`.
pub fn baseline_stats(setup: &RoundSetup, replicates: u32) -> BaselineStats {
    let n = replicates.max(1);
    let (mut day, mut prev, mut attack) = (0.0, 0.0, 0.0);
    for r in 0..n {
        let s = RoundSetup {
            seed: setup.seed.wrapping_add(r as u64),
            ..*setup
        };
        let trace = run_round(&s, &Plan::empty()).expect("the empty plan is valid");
        let summary = summarize(&trace);
        day += summary.peak_day as f64;
        prev += summary.peak_prevalence;
        attack += summary.attack_fraction;
    }
    let n = n as f64;
    BaselineStats {
        mean_peak_day: day / n,
        mean_peak_prevalence: prev / n,
        mean_attack_fraction: attack / n,
    }
}

/// Bisects `transmission_prob` on [0, 1], all other parameters held at
/// `setup.disease`, until the mean peak prevalence is within
/// [`PREVALENCE_TOLERANCE`] of the target or [`MAX_ITERATIONS`] is reached.
pub fn calibrate(
    setup: &RoundSetup,
    target: CalibrationTarget,
    replicates: u32,
) -> Result<Calibration, CalibrationError> {
    if target.peak_day <= 0.0 {
        return Err(CalibrationError::NonPositive { field: "peak day" });
    }
    if target.peak_prevalence <= 0.0 {
        return Err(CalibrationError::NonPositive {
            field: "peak prevalence",
        });
    }
    if replicates < 1 {
        return Err(CalibrationError::NoReplicates);
    }
    let at = |p: f64| {
        let mut s = *setup;
        s.disease.transmission_prob = p;
        baseline_stats(&s, replicates)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let low = at(lo).mean_peak_prevalence;
    let high = at(hi).mean_peak_prevalence;
    if !(low <= target.peak_prevalence && target.peak_prevalence <= high) {
        return Err(CalibrationError::NotBracketed {
            target: target.peak_prevalence,
            low,
            high,
        });
    }
    let mut best = None;
    for iteration in 1..=MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let stats = at(mid);
        let converged =
            (stats.mean_peak_prevalence - target.peak_prevalence).abs() <= PREVALENCE_TOLERANCE;
        best = Some(Calibration {
            transmission_prob: mid,
            stats,
            iterations: iteration,
            converged,
        });
        if converged {
            break;
        }
        if stats.mean_peak_prevalence < target.peak_prevalence {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.expect("at least one iteration runs"))
}
