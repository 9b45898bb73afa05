//! The invariant check battery at reduced sample counts.

use nspd::config::SolverConfig;
use nspd::runner::{cmd_check, CheckOptions, CheckReport};
use nspd::Result;

pub fn run_example() -> Result<CheckReport> {
    let mut config = SolverConfig::default();
    config.grid.n = 32;
    let opts = CheckOptions {
        rotation_samples: 10_000,
        weak_paths: 10_000,
        ratio_samples: 10,
        trajectory_steps: 10,
    };
    cmd_check(&config, &opts)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let report = run_example()?;
    print!("{}", report.render());
    Ok(())
}
