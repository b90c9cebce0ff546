use crate::situation::Situation;
use serde::{Deserialize, Serialize};
use std::io;
use thiserror::Error;

pub const TRACE_HEADER: [&str; 8] = ["day", "S", "E", "I", "II", "R", "IM", "D"];

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected trace header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: expected day {expected}, found {found}")]
    DayOrder {
        row: usize,
        expected: u32,
        found: u32,
    },
}

/// Per-day census series of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpidemicTrace {
    population: u32,
    total_cost: f64,
    days: Vec<Situation>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    day: u32,
    #[serde(rename = "S")]
    s: u32,
    #[serde(rename = "E")]
    e: u32,
    #[serde(rename = "I")]
    i: u32,
    #[serde(rename = "II")]
    ii: u32,
    #[serde(rename = "R")]
    r: u32,
    #[serde(rename = "IM")]
    im: u32,
    #[serde(rename = "D")]
    d: u32,
}

impl EpidemicTrace {
    pub fn new(population: u32, total_cost: f64) -> Self {
        EpidemicTrace {
            population,
            total_cost,
            days: Vec::new(),
        }
    }

    /// Builds a trace from an existing census series.
    pub fn from_days(population: u32, total_cost: f64, days: Vec<Situation>) -> Self {
        EpidemicTrace {
            population,
            total_cost,
            days,
        }
    }

    pub fn push(&mut self, day: Situation) {
        self.days.push(day);
    }

    pub fn days(&self) -> &[Situation] {
        &self.days
    }

    pub fn population(&self) -> u32 {
        self.population
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn set_total_cost(&mut self, cost: f64) {
        self.total_cost = cost;
    }

    pub fn last(&self) -> Option<&Situation> {
        self.days.last()
    }

    /// Writes `day,S,E,I,II,R,IM,D` with one row per day.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), TraceError> {
        let mut w = csv::Writer::from_writer(out);
        for (day, s) in self.days.iter().enumerate() {
            w.serialize(Row {
                day: day as u32,
                s: s.s,
                e: s.e,
                i: s.i,
                ii: s.ii,
                r: s.r,
                im: s.im,
                d: s.d,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a trace CSV back. Cost is not part of the CSV and comes back as 0;
    /// population is taken from the first row.
    pub fn read_csv<R: io::Read>(input: R) -> Result<Self, TraceError> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        if header != TRACE_HEADER {
            return Err(TraceError::Header(header));
        }
        let mut days = Vec::new();
        for (k, row) in r.deserialize::<Row>().enumerate() {
            let row = row?;
            if row.day as usize != k {
                return Err(TraceError::DayOrder {
                    row: k + 2,
                    expected: k as u32,
                    found: row.day,
                });
            }
            days.push(Situation::from_counts([
                row.s, row.e, row.i, row.ii, row.r, row.im, row.d,
            ]));
        }
        let population = days.first().map(|s| s.total() as u32).unwrap_or(0);
        Ok(EpidemicTrace::from_days(population, 0.0, days))
    }
}

/// Headline statistics of one trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    /// Earliest day with the largest I + II count.
    pub peak_day: u32,
    /// That count as a share of the population.
    pub peak_prevalence: f64,
    /// Share of the population ever infected by the last day.
    pub attack_fraction: f64,
    pub deaths: u32,
    pub total_cost: f64,
}

/// Peak, attack and death figures of a non-empty trace.
pub fn summarize(trace: &EpidemicTrace) -> TraceSummary {
    let mut peak_day = 0usize;
    let mut peak = 0u32;
    for (day, s) in trace.days().iter().enumerate() {
        if s.active_infections() > peak {
            peak = s.active_infections();
            peak_day = day;
        }
    }
    let population = trace.population();
    let fraction = |n: u32| {
        if population == 0 {
            0.0
        } else {
            n as f64 / population as f64
        }
    };
    let last = trace.last().copied().unwrap_or_default();
    TraceSummary {
        peak_day: peak_day as u32,
        peak_prevalence: fraction(peak),
        attack_fraction: fraction(last.ever_infected()),
        deaths: last.d,
        total_cost: trace.total_cost(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_with_active(active: &[u32], population: u32) -> EpidemicTrace {
        let days = active
            .iter()
            .map(|&a| Situation::from_counts([population - a, 0, a, 0, 0, 0, 0]))
            .collect();
        EpidemicTrace::from_days(population, 0.0, days)
    }

    #[test]
    fn peak_is_argmax() {
        let s = summarize(&trace_with_active(&[3, 5, 9, 5, 3], 100));
        assert_eq!(s.peak_day, 2);
        assert_eq!(s.peak_prevalence, 0.09);
    }

    #[test]
    fn no_infection_peaks_at_day_zero() {
        let s = summarize(&trace_with_active(&[0, 0, 0], 100));
        assert_eq!(s.peak_day, 0);
        assert_eq!(s.peak_prevalence, 0.0);
    }

    #[test]
    fn ties_pick_earliest_day() {
        let s = summarize(&trace_with_active(&[3, 9, 9, 3], 100));
        assert_eq!(s.peak_day, 1);
    }

    #[test]
    fn attack_counts_everyone_ever_infected() {
        let days = vec![
            Situation::from_counts([97, 0, 3, 0, 0, 0, 0]),
            Situation::from_counts([50, 5, 4, 1, 30, 8, 2]),
        ];
        let s = summarize(&EpidemicTrace::from_days(100, 7.5, days));
        assert_eq!(s.attack_fraction, 0.42);
        assert_eq!(s.deaths, 2);
        assert_eq!(s.total_cost, 7.5);
    }

    #[test]
    fn csv_round_trip() {
        let days = vec![
            Situation::from_counts([997, 0, 3, 0, 0, 0, 0]),
            Situation::from_counts([990, 7, 3, 0, 0, 0, 0]),
        ];
        let trace = EpidemicTrace::from_days(1000, 0.0, days);
        let text = trace.to_csv_string();
        assert!(text.starts_with("day,S,E,I,II,R,IM,D\n0,997,0,3,0,0,0,0\n"));
        let back = EpidemicTrace::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, trace);
    }

    #[test]
    fn csv_rejects_wrong_header() {
        let err = EpidemicTrace::read_csv("day,S,E\n0,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, TraceError::Header(_)));
    }
}
