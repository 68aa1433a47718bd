use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fsde_drift::cli;
use fsde_drift::config::{parse_override, OutputFormat, RunConfig};
use fsde_drift::error::exit_code;
use fsde_drift::Result;

/// Drift-parameter estimation for SDEs driven by fractional Brownian motion.
#[derive(Debug, Parser)]
#[command(name = "fsde-drift", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a configuration key (repeatable), e.g. --set H=0.7.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Master seed. Without it the config file, then $FSDE_DRIFT_SEED, then 0 is used.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one simulated noise bundle and its solution paths.
    Simulate,
    /// Estimate the drift parameter from `input` or from simulated paths.
    Estimate,
    /// Replicated experiment: summary at N_max and full trajectories.
    Experiment,
    /// Mean error over a grid of truncation thresholds.
    Sweep,
    /// Confidence-interval coverage at N_max.
    Coverage,
    /// Print the effective configuration as TOML.
    Config,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let overrides = cli
        .overrides
        .iter()
        .map(|kv| parse_override(kv))
        .collect::<Result<Vec<_>>>()?;
    let mut config = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(f) = &cli.format {
        config.format = f.parse::<OutputFormat>()?;
    }
    if cli.workers == Some(0) {
        return Err(fsde_drift::Error::config("workers", "must be at least 1"));
    }
    Ok(config)
}

fn run(cli: &Cli, config: &RunConfig) -> Result<()> {
    let workers = cli.workers;
    match cli.command {
        Command::Simulate => {
            for p in cli::cmd_simulate(config)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Estimate => {
            let (record, path) = cli::cmd_estimate(config)?;
            println!("{}", serde_json::to_string_pretty(&record).expect("json values serialize"));
            log::info!("wrote {}", path.display());
        }
        Command::Experiment => {
            let (report, files) = cli::cmd_experiment(config, workers)?;
            println!("{}", cli::describe(&report));
            for p in files {
                println!("wrote {}", p.display());
            }
        }
        Command::Sweep => {
            let (report, path) = cli::cmd_sweep(config, workers)?;
            println!("{}", cli::describe(&report));
            println!("wrote {}", path.display());
        }
        Command::Coverage => {
            let (report, path) = cli::cmd_coverage(config, workers)?;
            println!("{}", cli::describe(&report));
            println!("wrote {}", path.display());
        }
        Command::Config => print!("{}", config.to_toml()),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = load(&cli);
    let verbosity = cli.verbose.max(config.as_ref().map_or(0, |c| c.verbosity));
    let level = match verbosity {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    let result = config.and_then(|config| run(&cli, &config));
    match result {
        Ok(()) => ExitCode::from(exit_code::SUCCESS as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
