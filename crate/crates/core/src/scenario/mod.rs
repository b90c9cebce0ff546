//! Experiment configuration, the multi-round driver, calibration, and the
//! files a run leaves behind.

mod calibrate;
mod config;
mod experiment;
mod summary;

pub use calibrate::{
    baseline_stats, calibrate, BaselineStats, Calibration, CalibrationError, CalibrationTarget,
    MAX_ITERATIONS, PREVALENCE_TOLERANCE,
};
pub use config::{ConfigError, PlannerConfig, PoolConfig, ScenarioConfig};
pub use experiment::{
    baseline_round, controlled_round, eoc_round_config, log_file, run_experiment, trace_file,
    ExperimentError, RoundRecord, RunOptions, MEMORY_FILE, SUMMARY_FILE,
};
pub use summary::{read_summary_csv, summary_table, write_summary_csv, RoundSummary};
