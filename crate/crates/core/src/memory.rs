//! Case memory: retained (situation, plan, successfulness) records and
//! nearest-neighbour retrieval over them.
//!
//! Cases are kept regardless of how well they did. Weak cases are filtered
//! out at retrieval time instead, so the file keeps a full history.
//!
//! On disk a store is one JSON object per line:
//!
//! ```text
//! {"id":0,"successfulness":0.41,"situation":{"s":997,"e":0,"i":3,"ii":0,"r":0,"im":0,"d":0,"tick":0},"plan":{"id":0,"certainty":0.0,"tasks":[...]}}
//! ```

use crate::plan::Plan;
use crate::situation::{distance, Situation};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("successfulness {0} outside [0, 1]")]
    Successfulness(f64),
    #[error("memory file i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: invalid record: {reason}")]
    Invalid { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryCase {
    pub id: u64,
    pub successfulness: f64,
    pub situation: Situation,
    pub plan: Plan,
}

/// Retrieval thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MemorySettings {
    /// Cases scoring below this are ignored by retrieval.
    pub min_successfulness: f64,
    /// Largest distance at which a retrieved case is reused as is.
    pub match_radius: u64,
}

impl Default for MemorySettings {
    fn default() -> Self {
        MemorySettings {
            min_successfulness: 0.05,
            match_radius: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MemoryStore {
    cases: Vec<MemoryCase>,
    next_id: u64,
    pub settings: MemorySettings,
}

impl MemoryStore {
    pub fn new(settings: MemorySettings) -> Self {
        MemoryStore {
            cases: Vec::new(),
            next_id: 0,
            settings,
        }
    }

    pub fn cases(&self) -> &[MemoryCase] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn get(&self, id: u64) -> Option<&MemoryCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// Appends a case and returns its id.
    pub fn store(
        &mut self,
        successfulness: f64,
        situation: Situation,
        plan: Plan,
    ) -> Result<u64, MemoryError> {
        if !(0.0..=1.0).contains(&successfulness) {
            return Err(MemoryError::Successfulness(successfulness));
        }
        let id = self.next_id;
        self.cases.push(MemoryCase {
            id,
            successfulness,
            situation,
            plan,
        });
        self.next_id += 1;
        Ok(id)
    }

    /// Closest eligible case to `query`, with its distance. Ties go to the
    /// higher successfulness, then the lower id.
    pub fn retrieve_nearest(&self, query: &Situation) -> Option<(&MemoryCase, u64)> {
        let floor = self.settings.min_successfulness;
        let mut best: Option<(&MemoryCase, u64)> = None;
        for case in self.cases.iter().filter(|c| c.successfulness >= floor) {
            let d = distance(query, &case.situation);
            let better = match best {
                None => true,
                Some((b, bd)) => {
                    d < bd
                        || (d == bd
                            && (case.successfulness > b.successfulness
                                || (case.successfulness == b.successfulness && case.id < b.id)))
                }
            };
            if better {
                best = Some((case, d));
            }
        }
        best
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), MemoryError> {
        let mut out = BufWriter::new(out);
        for case in &self.cases {
            serde_json::to_writer(&mut out, case).map_err(io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: io::Read>(input: R, settings: MemorySettings) -> Result<Self, MemoryError> {
        let mut store = MemoryStore::new(settings);
        let mut ids = HashSet::new();
        for (k, line) in BufReader::new(input).lines().enumerate() {
            let line_no = k + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let case: MemoryCase = serde_json::from_str(&line).map_err(|e| {
                let reason = e.to_string();
                if e.is_data() {
                    MemoryError::Invalid {
                        line: line_no,
                        reason,
                    }
                } else {
                    MemoryError::Malformed {
                        line: line_no,
                        reason,
                    }
                }
            })?;
            let invalid = |reason: String| MemoryError::Invalid {
                line: line_no,
                reason,
            };
            if !(0.0..=1.0).contains(&case.successfulness) {
                return Err(invalid(format!(
                    "successfulness {} outside [0, 1]",
                    case.successfulness
                )));
            }
            if !ids.insert(case.id) {
                return Err(invalid(format!("duplicate case id {}", case.id)));
            }
            case.plan
                .validate(u32::MAX)
                .map_err(|e| invalid(e.to_string()))?;
            store.next_id = store.next_id.max(case.id + 1);
            store.cases.push(case);
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MemoryError> {
        self.write_to(File::create(path)?)
    }

    /// Loads a store with default thresholds.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MemoryError> {
        MemoryStore::load_with(path, MemorySettings::default())
    }

    pub fn load_with(
        path: impl AsRef<Path>,
        settings: MemorySettings,
    ) -> Result<Self, MemoryError> {
        MemoryStore::read_from(File::open(path)?, settings)
    }
}
