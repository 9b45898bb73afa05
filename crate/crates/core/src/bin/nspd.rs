use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nspd::config::{parse_config, ConvergenceProblem, SolverConfig};
use nspd::runner::{
    cmd_check, cmd_convergence, cmd_ensemble, cmd_simulate, print_defaults, CheckOptions, EXIT_ERROR,
};
use nspd::Result;

/// Exit code of `check` when some suite fails.
const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "nspd", version, about = "Stochastic nematic liquid-crystal flow on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (TOML); defaults are used for every missing key.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Overrides `noise.seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Overrides `output.snapshots_every`.
    #[arg(long, value_name = "N")]
    snapshots_every: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    LinearAdditive,
    Deterministic,
    ConstraintDrift,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and write its diagnostics.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Run many trajectories and aggregate survival curves.
    Ensemble {
        #[command(flatten)]
        common: Common,
        /// Overrides `ensemble.n_traj`.
        #[arg(long, value_name = "N")]
        n_traj: Option<usize>,
        /// Worker threads; all cores when unset.
        #[arg(long, value_name = "N", env = "NSPD_WORKERS")]
        workers: Option<usize>,
    },
    /// Measure convergence order over a halving sequence of time steps.
    Convergence {
        #[command(flatten)]
        common: Common,
        /// Comma-separated steps, coarsest first; overrides `convergence.dt_list`.
        #[arg(long, value_delimiter = ',', value_name = "DT,..")]
        dt_list: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        problem: Option<Problem>,
        /// Worker threads; all cores when unset.
        #[arg(long, value_name = "N", env = "NSPD_WORKERS")]
        workers: Option<usize>,
    },
    /// Run the invariant check battery.
    Check {
        #[command(flatten)]
        common: Common,
        /// Flip the sign of the Ito correction drift (the consistency suite must then fail).
        #[arg(long)]
        flip_ito_sign: bool,
    },
    /// Print the default configuration.
    PrintDefaults,
}

fn load(common: &Common) -> Result<SolverConfig> {
    let mut config = match &common.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => SolverConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.noise.seed = seed;
    }
    if let Some(k) = common.snapshots_every {
        config.output.snapshots_every = k;
    }
    if let Some(out) = &common.out {
        config.output.dir = out.to_string_lossy().into_owned();
    }
    config.validate()?;
    Ok(config)
}

fn set_workers(workers: Option<usize>) {
    if let Some(w) = workers {
        // only fails if the global pool already exists, in which case it is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global();
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Simulate { common } => {
            let config = load(&common)?;
            let record = cmd_simulate(&config, config.output.dir.as_ref())?;
            println!("status: {}", record.status.as_str());
            Ok(record.status.exit_code() as u8)
        }
        Command::Ensemble {
            common,
            n_traj,
            workers,
        } => {
            let mut config = load(&common)?;
            if let Some(n) = n_traj {
                config.ensemble.n_traj = n;
            }
            let outcome = cmd_ensemble(&config, config.ensemble.n_traj, workers, config.output.dir.as_ref())?;
            println!("trajectories: {}", outcome.samples.len());
            Ok(outcome.exit_code() as u8)
        }
        Command::Convergence {
            common,
            dt_list,
            problem,
            workers,
        } => {
            let mut config = load(&common)?;
            if let Some(d) = dt_list {
                config.convergence.dt_list = d;
            }
            if let Some(p) = problem {
                config.convergence.problem = match p {
                    Problem::LinearAdditive => ConvergenceProblem::LinearAdditive,
                    Problem::Deterministic => ConvergenceProblem::Deterministic,
                    Problem::ConstraintDrift => ConvergenceProblem::ConstraintDrift,
                };
            }
            set_workers(workers);
            let report = cmd_convergence(&config, config.output.dir.as_ref())?;
            for (dt, e) in report.dts.iter().zip(&report.errors) {
                println!("dt = {dt:e}  error = {e:e}");
            }
            println!("slope: {:.4}", report.slope);
            Ok(0)
        }
        Command::Check {
            common,
            flip_ito_sign,
        } => {
            let mut config = load(&common)?;
            if flip_ito_sign {
                config.scheme.ito_correction_sign = -config.scheme.ito_correction_sign;
            }
            let report = cmd_check(&config, &CheckOptions::default())?;
            print!("{}", report.render());
            Ok(if report.passed() { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::PrintDefaults => {
            print!("{}", print_defaults());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
