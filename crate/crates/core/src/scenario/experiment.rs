use super::config::ScenarioConfig;
use super::summary::{write_summary_csv, RoundSummary};
use crate::eoc::{run_eoc_round, EocOutcome, EocRoundConfig, LogError, RoundError, RoundLog};
use crate::epidemic::{run_round, summarize, EpidemicTrace, TraceError};
use crate::memory::{MemoryError, MemoryStore};
use crate::plan::Plan;
use rayon::{ThreadPool, ThreadPoolBuilder};
use std::fs::{self, File};
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const MEMORY_FILE: &str = "memory.jsonl";

pub fn trace_file(round: u32) -> String {
    format!("round_{round:03}_trace.csv")
}

pub fn log_file(round: u32) -> String {
    format!("round_{round:03}_log.jsonl")
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Round(#[from] RoundError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("summary csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl ExperimentError {
    fn io(path: &Path, source: io::Error) -> Self {
        ExperimentError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Failures reading or writing files, as opposed to simulation errors.
    pub fn is_io(&self) -> bool {
        match self {
            ExperimentError::Io { .. } | ExperimentError::Csv(_) => true,
            ExperimentError::Memory(e) => matches!(e, MemoryError::Io(_)),
            ExperimentError::Trace(TraceError::Csv(e)) => e.is_io_error(),
            ExperimentError::Log(e) => matches!(e, LogError::Io(_)),
            _ => false,
        }
    }
}

/// How an experiment is run and where its files go.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Defaults to `memory.jsonl` inside `out_dir`.
    pub memory_file: Option<PathBuf>,
    /// False runs the bare epidemic with no EOC.
    pub control: bool,
    /// Worker threads for plan evaluation; `None` evaluates sequentially.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn memory_path(&self) -> PathBuf {
        self.memory_file
            .clone()
            .unwrap_or_else(|| self.out_dir.join(MEMORY_FILE))
    }
}

/// What one round produced.
#[derive(Debug, Clone)]
pub struct RoundRecord {
    pub summary: RoundSummary,
    pub trace: EpidemicTrace,
    /// Absent for no-control rounds.
    pub outcome: Option<EocOutcome>,
}

impl RoundRecord {
    pub fn log(&self) -> Option<&RoundLog> {
        self.outcome.as_ref().map(|o| &o.log)
    }
}

/// EOC round settings for round `k` (1-based).
pub fn eoc_round_config(cfg: &ScenarioConfig, k: u32) -> EocRoundConfig {
    let seed = cfg.round_seed(k);
    EocRoundConfig {
        population: cfg.population,
        initial_infected: cfg.initial_infected,
        duration_days: cfg.duration_days,
        seed,
        disease: cfg.disease,
        eoc: cfg.eoc.clone(),
        budget: cfg.planner.budget(),
        policy: cfg.detection,
        pool: cfg.pool.for_round(seed),
        evaluation_replicates: cfg.planner.evaluation_replicates,
        cost_scale: cfg.planner.cost_scale,
    }
}

/// Round `k` without any response.
pub fn baseline_round(cfg: &ScenarioConfig, k: u32) -> RoundRecord {
    let trace = run_round(&cfg.round_setup(k), &Plan::empty()).expect("the empty plan is valid");
    RoundRecord {
        summary: RoundSummary::new(k, &summarize(&trace), 0.0, 0.0, None),
        trace,
        outcome: None,
    }
}

/// Round `k` under EOC control, reading and extending `store`.
pub fn controlled_round(
    cfg: &ScenarioConfig,
    k: u32,
    store: &mut MemoryStore,
    threads: Option<&ThreadPool>,
) -> Result<RoundRecord, RoundError> {
    let outcome = run_eoc_round(&eoc_round_config(cfg, k), store, threads)?;
    let summary = RoundSummary::new(
        k,
        &summarize(&outcome.trace),
        outcome.certainty,
        outcome.successfulness,
        outcome.stored_case_id,
    );
    Ok(RoundRecord {
        summary,
        trace: outcome.trace.clone(),
        outcome: Some(outcome),
    })
}

/// Runs `cfg.rounds` rounds in order, carrying memory between them, and
/// writes per-round traces and logs, the memory file and `summary.csv`.
pub fn run_experiment(
    cfg: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<Vec<RoundRecord>, ExperimentError> {
    fs::create_dir_all(&opts.out_dir).map_err(|e| ExperimentError::io(&opts.out_dir, e))?;
    let threads = match opts.threads {
        Some(n) if n > 1 => Some(ThreadPoolBuilder::new().num_threads(n).build()?),
        _ => None,
    };
    let memory_path = opts.memory_path();
    let mut store = if opts.control && memory_path.exists() {
        MemoryStore::load_with(&memory_path, cfg.memory)?
    } else {
        MemoryStore::new(cfg.memory)
    };

    let mut records = Vec::new();
    for k in 1..=cfg.rounds {
        let record = if opts.control {
            controlled_round(cfg, k, &mut store, threads.as_ref())?
        } else {
            baseline_round(cfg, k)
        };
        let trace_path = opts.out_dir.join(trace_file(k));
        record.trace.write_csv(
            File::create(&trace_path).map_err(|e| ExperimentError::io(&trace_path, e))?,
        )?;
        if let Some(log) = record.log() {
            log.save(opts.out_dir.join(log_file(k)))?;
            store.save(&memory_path)?;
        }
        records.push(record);
    }

    let summaries: Vec<RoundSummary> = records.iter().map(|r| r.summary.clone()).collect();
    let summary_path = opts.out_dir.join(SUMMARY_FILE);
    write_summary_csv(
        &summaries,
        File::create(&summary_path).map_err(|e| ExperimentError::io(&summary_path, e))?,
    )?;
    Ok(records)
}
