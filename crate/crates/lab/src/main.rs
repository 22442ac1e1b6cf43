use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use bellamp::commands::{self, CommonOptions, SweepOptions};
use bellamp::config::{LoadedConfig, PRESETS};
use bellamp::service::{self, AppState, ServiceConfig};
use bellamp_core::sweep::{DEFAULT_MIN_SUCCESS, DEFAULT_SWEEP_POINTS};
use bellamp_core::theory::ThresholdSide;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Monte Carlo CHSH tests of a measure-and-prepare amplifier read out by
/// threshold detectors.
#[derive(Parser)]
#[command(name = "bellamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file, or the name of a builtin preset.
    #[arg(long, short)]
    config: String,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for the output artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn options(&self, reveal_hidden: bool) -> CommonOptions {
        CommonOptions {
            config: self.config.clone(),
            seed: self.seed,
            out: self.out.clone(),
            reveal_hidden,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Low,
    High,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a CHSH run (or reanalyze the config's counts file).
    Run {
        #[command(flatten)]
        common: Common,
        /// Include the cloner angle of every trial in the trial log.
        #[arg(long)]
        reveal_hidden: bool,
    },
    /// Sweep the detector threshold and write S against success probability.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_SUCCESS)]
        min_success: f64,
        #[arg(long, value_enum, default_value = "low")]
        side: Side,
    },
    /// Compute the CHSH estimate from a trial log or a counts file.
    Analyze {
        file: PathBuf,
        /// Config supplying the analyzer angles (defaults to the standard ones).
        #[arg(long, short)]
        config: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit two or three fringe scans and evaluate the visibility witness.
    Witness {
        #[arg(required = true, num_args = 2..=3)]
        scans: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a fringe scan of the A analyzer at a fixed B basis.
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        beta_deg: f64,
        #[arg(long, default_value_t = 12)]
        points: usize,
    },
    /// Start the human-observer service.
    Serve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
    /// List the builtin presets.
    Presets,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run { common, reveal_hidden } => {
            print!("{}", commands::cmd_run(&common.options(reveal_hidden))?.report);
        }
        Command::Sweep {
            common,
            points,
            min_success,
            side,
        } => {
            let side = match side {
                Side::Low => ThresholdSide::Low,
                Side::High => ThresholdSide::High,
            };
            let (_, series) = commands::cmd_sweep(
                &common.options(false),
                &SweepOptions {
                    points,
                    min_success,
                    side,
                },
            )?;
            print!("{series}");
        }
        Command::Analyze { file, config, out } => {
            print!("{}", commands::cmd_analyze(&file, config.as_deref(), &out)?.1);
        }
        Command::Witness { scans, out } => {
            print!("{}", commands::cmd_witness(&scans, &out)?.1);
        }
        Command::Scan {
            common,
            beta_deg,
            points,
        } => {
            print!("{}", commands::cmd_scan(&common.options(false), beta_deg, points)?);
        }
        Command::Serve { common, addr } => {
            let mut loaded = LoadedConfig::load(&common.config)?;
            if let Some(seed) = common.seed {
                loaded.file.seed = seed;
            }
            let state = AppState::new(ServiceConfig {
                run: loaded.file.run_config()?,
                settings: loaded.file.chsh_settings(),
                pacing: Duration::from_millis(loaded.file.service.trial_pacing_ms),
            })?;
            tokio::runtime::Runtime::new()?.block_on(service::serve(state, addr))?;
        }
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
