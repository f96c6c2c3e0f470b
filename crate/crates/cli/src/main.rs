//! `sindy`: simulate benchmark systems, differentiate trajectories, identify
//! sparse (rational) dynamics, validate and report.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

/// Exit code for identification-quality problems (e.g. no Pareto cliff).
pub const EXIT_QUALITY: u8 = 1;
/// Exit code for usage, configuration, and IO errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "sindy",
    version,
    about = "Identify sparse nonlinear (rational) dynamics from time-series data"
)]
struct Cli {
    /// Print the fully resolved default run configuration as JSON and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

/// Flags shared by the config-driven subcommands; every flag overrides the
/// matching field of the JSON run configuration.
#[derive(Args, Debug, Clone, Default)]
struct ConfigArgs {
    /// JSON run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark system: michaelis_menten (mm), regulatory, glycolysis.
    #[arg(long)]
    benchmark: Option<String>,
    /// Ground-truth model JSON file (alternative to --benchmark).
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// RNG seed for initial-condition sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of sampled initial conditions.
    #[arg(long)]
    n_ics: Option<usize>,
    /// End of the simulation time span.
    #[arg(long)]
    t_end: Option<f64>,
    /// Uniform samples on [0, t_end].
    #[arg(long)]
    n_samples: Option<usize>,
    /// Output directory (default: $SINDY_OUTPUT_ROOT/<benchmark>).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(b) = &self.benchmark {
            cfg.benchmark = Some(b.parse::<implicit_sindy::dynamics::Benchmark>()?.name().into());
        }
        if let Some(p) = &self.model_file {
            cfg.model_file = Some(p.clone());
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(n) = self.n_ics {
            cfg.n_ics = Some(n);
        }
        if let Some(t) = self.t_end {
            cfg.t_end = Some(t);
        }
        if let Some(n) = self.n_samples {
            cfg.n_samples = Some(n);
        }
        if let Some(p) = &self.output_dir {
            cfg.output_dir = Some(p.clone());
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a benchmark (or model file) into trajectory CSVs + manifest.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Numerically differentiate trajectory CSVs (central or TV-regularized).
    Differentiate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory with trajectory CSVs (and optional manifest.json).
        #[arg(long)]
        input: PathBuf,
        /// Differentiation method: central | tv_regularized.
        #[arg(long)]
        method: Option<String>,
        /// TV regularization weight.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Identify a sparse model from a dataset directory.
    Identify {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Dataset directory (default: the resolved output directory).
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compare an identified model against the ground truth on test data.
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Identified-model JSON file.
        #[arg(long)]
        model: PathBuf,
        /// Number of test initial conditions.
        #[arg(long, default_value_t = 10)]
        n_test_ics: usize,
        /// Seed for test initial conditions (default: training seed + 1).
        #[arg(long)]
        test_seed: Option<u64>,
    },
    /// Summarize the artifacts of a completed (or partial) run directory.
    Report {
        /// Run directory containing manifest/model/pareto/validation files.
        run_dir: PathBuf,
    },
    /// Library combinatorics: monomial and polynomial-structure counts.
    Count {
        /// Number of state variables.
        #[arg(long)]
        states: usize,
        /// Maximum total degree.
        #[arg(long)]
        degree: usize,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    if cli.print_defaults {
        let benchmark = match &cli.command {
            Some(Command::Simulate { cfg })
            | Some(Command::Identify { cfg, .. })
            | Some(Command::Differentiate { cfg, .. })
            | Some(Command::Validate { cfg, .. }) => match &cfg.benchmark {
                Some(b) => Some(b.parse()?),
                None => None,
            },
            _ => None,
        };
        let defaults = RunConfig::defaults_for(benchmark);
        println!("{}", serde_json::to_string_pretty(&defaults)?);
        return Ok(0);
    }
    let command = match cli.command {
        Some(c) => c,
        None => {
            anyhow::bail!("a subcommand is required (see --help)");
        }
    };
    match command {
        Command::Simulate { cfg } => commands::simulate::run(&cfg.resolve()?, cfg.output_dir.as_deref()),
        Command::Differentiate {
            cfg,
            input,
            method,
            alpha,
        } => {
            let run_cfg = cfg.resolve()?;
            commands::differentiate::run(
                &run_cfg,
                &input,
                method.as_deref(),
                alpha,
                cfg.output_dir.as_deref(),
            )
        }
        Command::Identify { cfg, data } => {
            let run_cfg = cfg.resolve()?;
            commands::identify::run(&run_cfg, data.as_deref(), cfg.output_dir.as_deref())
        }
        Command::Validate {
            cfg,
            model,
            n_test_ics,
            test_seed,
        } => {
            let run_cfg = cfg.resolve()?;
            commands::validate::run(
                &run_cfg,
                &model,
                n_test_ics,
                test_seed,
                cfg.output_dir.as_deref(),
            )
        }
        Command::Report { run_dir } => commands::report::run(&run_dir),
        Command::Count { states, degree } => commands::count::run(states, degree),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(EXIT_USAGE)
        }
    }
}
