//! `reldyad`: fit, simulate and study relational event models with
//! spurious events.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on input errors.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reldyad_core::simulate::GeneratorSpec;
use reldyad_core::study::{Dg, Scale};

use config::{RunConfig, StudyBlock};

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Failure::Numerical(msg.into())
    }

    pub fn from_core(e: reldyad_core::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Numerical(_) => 1,
            Failure::Input(_) => 2,
        }
    }
}

impl From<reldyad_core::Error> for Failure {
    fn from(e: reldyad_core::Error) -> Self {
        Failure::from_core(e)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "reldyad", version, about = "Relational event models with spurious events")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Only report errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DgArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<DgArg> for Dg {
    fn from(d: DgArg) -> Self {
        match d {
            DgArg::One => Dg::Dg1,
            DgArg::Two => Dg::Dg2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a REM, or a REMSE when the config has a spurious_model block.
    Fit {
        /// Run configuration (JSON).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Generate a labelled event stream.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Preset generator, used when the config has no generator block.
        #[arg(long, value_enum, default_value = "1")]
        dg: DgArg,
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleArg,
        #[command(flatten)]
        common: Common,
    },
    /// Replicated simulation study comparing REMSE and REM.
    Study {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "1")]
        dg: DgArg,
        #[arg(long, value_enum, default_value = "desk")]
        scale: ScaleArg,
        /// Number of replications (default depends on the scale).
        #[arg(long)]
        reps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: Option<&PathBuf>) -> Result<RunConfig, Failure> {
    path.map_or_else(|| Ok(RunConfig::default()), |p| RunConfig::load(p))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Cmd::Fit { config, common } => {
            let cfg = RunConfig::load(&config)?;
            commands::fit(cfg, common.seed, &common.out, common.quiet)
        }
        Cmd::Simulate { config, dg, scale, common } => {
            let cfg = load(config.as_ref())?;
            let scale = Scale::from(scale);
            let preset = match Dg::from(dg) {
                Dg::Dg1 => GeneratorSpec::dg1(scale.n_actors(), scale.true_events()),
                Dg::Dg2 => GeneratorSpec::dg2(scale.n_actors(), scale.true_events()),
            };
            commands::simulate(cfg, common.seed, preset, &common.out, common.quiet)
        }
        Cmd::Study { config, dg, scale, reps, common } => {
            let cfg = load(config.as_ref())?;
            let block = match (&cfg.study, config.is_some()) {
                (Some(b), true) => StudyBlock {
                    reps: reps.or(b.reps),
                    ..b.clone()
                },
                _ => StudyBlock {
                    dg: dg.into(),
                    scale: scale.into(),
                    reps,
                },
            };
            commands::study(cfg, common.seed, block, &common.out, common.quiet)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = match &cli.command {
        Cmd::Fit { common, .. } | Cmd::Simulate { common, .. } | Cmd::Study { common, .. } => common.quiet,
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(if quiet { "error" } else { "info" }))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("reldyad: {e}");
            ExitCode::from(e.code())
        }
    }
}
