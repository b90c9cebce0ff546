use clap::{Args, Parser, Subcommand};
use immune_eoc::scenario::{
    calibrate, run_experiment, summary_table, CalibrationTarget, ConfigError, RunOptions,
    ScenarioConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

/// Pandemic response rounds driven by an immune-inspired planner.
#[derive(Parser)]
#[command(name = "immune-eoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run simulation rounds and write traces, logs, memory and a summary.
    Run(RunArgs),
    /// Fit the transmission probability to a target baseline outbreak.
    Calibrate(CalibrateArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `rounds` from the config.
    #[arg(long)]
    rounds: Option<u32>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Memory file read before and written after each round.
    #[arg(long)]
    memory_file: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Run the bare epidemic with no EOC response.
    #[arg(long)]
    no_control: bool,
    /// Worker threads for plan evaluation.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    target_peak_day: f64,
    /// Fraction of the population, e.g. 0.608.
    #[arg(long, default_value_t = 0.608)]
    target_peak_prev: f64,
    #[arg(long, default_value_t = 20)]
    replicates: u32,
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn load_config(path: &PathBuf) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::load(path).map_err(|e| config_failure(&e))
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_CONFIG })
}

fn run(args: RunArgs) -> Result<(), ExitCode> {
    let mut cfg = load_config(&args.config)?;
    if let Some(rounds) = args.rounds {
        cfg.rounds = rounds;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| config_failure(&e))?;
    let opts = RunOptions {
        out_dir: args.out_dir,
        memory_file: args.memory_file,
        control: !args.no_control,
        threads: args.threads,
    };
    let records = run_experiment(&cfg, &opts).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_IO)
    })?;
    let summaries: Vec<_> = records.into_iter().map(|r| r.summary).collect();
    print!("{}", summary_table(&summaries));
    Ok(())
}

fn calibrate_cmd(args: CalibrateArgs) -> Result<(), ExitCode> {
    let cfg = load_config(&args.config)?;
    let target = CalibrationTarget {
        peak_day: args.target_peak_day,
        peak_prevalence: args.target_peak_prev,
    };
    let result = calibrate(&cfg.round_setup(1), target, args.replicates).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })?;
    let mut disease = cfg.disease;
    disease.transmission_prob = result.transmission_prob;
    println!(
        "# mean peak day {:.2}, mean peak prevalence {:.4}, mean attack {:.4} over {} replicates",
        result.stats.mean_peak_day,
        result.stats.mean_peak_prevalence,
        result.stats.mean_attack_fraction,
        args.replicates
    );
    println!(
        "# {} after {} iterations",
        if result.converged {
            "converged"
        } else {
            "not converged"
        },
        result.iterations
    );
    println!("[disease]");
    print!(
        "{}",
        toml::to_string(&disease).expect("disease parameters serialize")
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Calibrate(args) => calibrate_cmd(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
