use crate::epidemic::TraceSummary;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io;

/// Outcome of one round as reported to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    pub peak_day: u32,
    #[serde(rename = "peak_prev")]
    pub peak_prevalence: f64,
    #[serde(rename = "attack")]
    pub attack_fraction: f64,
    pub deaths: u32,
    #[serde(rename = "cost")]
    pub total_cost: f64,
    #[serde(rename = "certainty")]
    pub plan_certainty: f64,
    #[serde(rename = "successfulness")]
    pub realized_successfulness: f64,
    pub stored_case_id: Option<u64>,
}

impl RoundSummary {
    pub fn new(
        round: u32,
        trace: &TraceSummary,
        plan_certainty: f64,
        realized_successfulness: f64,
        stored_case_id: Option<u64>,
    ) -> Self {
        RoundSummary {
            round,
            peak_day: trace.peak_day,
            peak_prevalence: trace.peak_prevalence,
            attack_fraction: trace.attack_fraction,
            deaths: trace.deaths,
            total_cost: trace.total_cost,
            plan_certainty,
            realized_successfulness,
            stored_case_id,
        }
    }
}

/// Writes summaries as CSV with a header row.
pub fn write_summary_csv<W: io::Write>(
    summaries: &[RoundSummary],
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: io::Read>(input: R) -> Result<Vec<RoundSummary>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Fixed-width table for the terminal.
pub fn summary_table(summaries: &[RoundSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>8} {:>9} {:>7} {:>6} {:>10} {:>9} {:>14} {:>5}",
        "round",
        "peak_day",
        "peak_prev",
        "attack",
        "deaths",
        "cost",
        "certainty",
        "successfulness",
        "case"
    );
    for s in summaries {
        let case = s
            .stored_case_id
            .map_or_else(|| "-".to_string(), |id| id.to_string());
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>8.1}% {:>6.1}% {:>6} {:>10.1} {:>9.4} {:>14.6} {:>5}",
            s.round,
            s.peak_day,
            100.0 * s.peak_prevalence,
            100.0 * s.attack_fraction,
            s.deaths,
            s.total_cost,
            s.plan_certainty,
            s.realized_successfulness,
            case
        );
    }
    out
}
