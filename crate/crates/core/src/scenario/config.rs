use crate::eoc::EocConfig;
use crate::epidemic::{DiseaseParams, ParamError, RoundSetup};
use crate::memory::MemorySettings;
use crate::plan::{PlanError, RandomPoolSpec, ResourcePool};
use crate::planner::SearchBudget;
use crate::seed;
use crate::situation::SelfPolicy;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("config does not parse: {0}")]
    Parse(String),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// I/O problems are distinguished from bad content.
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

/// Planner settings: the search budget plus how plans are scored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub generations: usize,
    pub population_size: usize,
    pub clones_per_elite: usize,
    pub acceptable_successfulness: f64,
    /// Cost at which a plan's score is halved.
    pub cost_scale: f64,
    /// Seeded simulations averaged per plan evaluation.
    pub evaluation_replicates: u32,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let b = SearchBudget::default();
        PlannerConfig {
            generations: b.generations,
            population_size: b.population_size,
            clones_per_elite: b.clones_per_elite,
            acceptable_successfulness: b.acceptable_successfulness,
            cost_scale: 5000.0,
            evaluation_replicates: 1,
        }
    }
}

impl PlannerConfig {
    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            generations: self.generations,
            population_size: self.population_size,
            clones_per_elite: self.clones_per_elite,
            acceptable_successfulness: self.acceptable_successfulness,
        }
    }
}

/// Either a pool drawn afresh each round or one fixed pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PoolConfig {
    Random(RandomPoolSpec),
    Fixed(ResourcePool),
}

impl PoolConfig {
    /// Pool used by the round with seed `round_seed`.
    pub fn for_round(&self, round_seed: u64) -> ResourcePool {
        match self {
            PoolConfig::Fixed(pool) => pool.clone(),
            PoolConfig::Random(spec) => {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed::derive(round_seed, seed::stream::POOL));
                spec.draw(&mut rng)
            }
        }
    }
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub population: u32,
    pub initial_infected: u32,
    pub duration_days: u32,
    pub seed: u64,
    #[serde(default = "one_round")]
    pub rounds: u32,
    #[serde(default)]
    pub disease: DiseaseParams,
    #[serde(default)]
    pub eoc: EocConfig,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub memory: MemorySettings,
    #[serde(default)]
    pub detection: SelfPolicy,
    pub pool: PoolConfig,
}

fn one_round() -> u32 {
    1
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        ScenarioConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config values are representable in TOML")
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population < 1 {
            return Err(ConfigError::invalid("population", "must be at least 1"));
        }
        if self.initial_infected > self.population {
            return Err(ConfigError::invalid(
                "initial_infected",
                format!(
                    "{} exceeds population {}",
                    self.initial_infected, self.population
                ),
            ));
        }
        if self.duration_days < 1 {
            return Err(ConfigError::invalid("duration_days", "must be at least 1"));
        }
        if self.rounds < 1 {
            return Err(ConfigError::invalid("rounds", "must be at least 1"));
        }
        self.disease.validate().map_err(|e| match e {
            ParamError::OutOfRange { field, reason } => {
                ConfigError::invalid(format!("disease.{field}"), reason)
            }
        })?;
        self.eoc
            .validate()
            .map_err(|e| ConfigError::invalid(format!("eoc.{}", e.field), e.to_string()))?;
        if self.eoc.name.is_empty() {
            return Err(ConfigError::invalid("eoc.name", "must not be empty"));
        }
        self.planner
            .budget()
            .validate()
            .map_err(|reason| ConfigError::invalid("planner", reason))?;
        if !(self.planner.cost_scale > 0.0 && self.planner.cost_scale.is_finite()) {
            return Err(ConfigError::invalid(
                "planner.cost_scale",
                "must be a positive number",
            ));
        }
        if self.planner.evaluation_replicates < 1 {
            return Err(ConfigError::invalid(
                "planner.evaluation_replicates",
                "must be at least 1",
            ));
        }
        if !(0.0..=1.0).contains(&self.memory.min_successfulness) {
            return Err(ConfigError::invalid(
                "memory.min_successfulness",
                "must lie in [0, 1]",
            ));
        }
        match &self.pool {
            PoolConfig::Random(spec) => spec
                .validate()
                .map_err(|reason| ConfigError::invalid("pool", reason))?,
            PoolConfig::Fixed(pool) => pool.validate().map_err(|e| match e {
                PlanError::Template { action, reason } => {
                    ConfigError::invalid(format!("pool.{action}"), reason)
                }
                other => ConfigError::invalid("pool", other.to_string()),
            })?,
        }
        Ok(())
    }

    /// Seed of round `k` (1-based): the base seed for round 1, then one more
    /// per round.
    pub fn round_seed(&self, k: u32) -> u64 {
        self.seed.wrapping_add(k.saturating_sub(1) as u64)
    }

    pub fn round_setup(&self, k: u32) -> RoundSetup {
        RoundSetup {
            population: self.population,
            initial_infected: self.initial_infected,
            duration_days: self.duration_days,
            seed: self.round_seed(k),
            disease: self.disease,
        }
    }
}
