//! Orchestration behind the command-line surface: single runs, ensembles,
//! convergence sweeps and the invariant check battery.

mod check;
mod convergence;
mod ensemble;
mod simulate;

pub use check::{
    cmd_check, failing_config, inverse_blowup_record, Bound, CheckOptions, CheckReport, Metric,
    SuiteResult,
};
pub use convergence::{
    cmd_convergence, convergence_study, problem_config, problem_name, validate_dt_list,
    ConvergenceReport,
};
pub use ensemble::{cmd_ensemble, survival_grid, trajectory_amplitude, EnsembleOutcome};
pub use simulate::cmd_simulate;

use crate::config::SolverConfig;

/// Exit code for errors that prevent a run from producing its outputs.
pub const EXIT_ERROR: i32 = 1;

/// The default configuration as canonical TOML.
pub fn print_defaults() -> String {
    SolverConfig::default().to_toml()
}
