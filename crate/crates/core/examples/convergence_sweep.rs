//! Strong error of the linearized additive-noise problem over four step halvings.

use nspd::config::{ConvergenceProblem, SolverConfig};
use nspd::runner::{convergence_study, ConvergenceReport};
use nspd::Result;

pub fn run_example() -> Result<ConvergenceReport> {
    let mut config = SolverConfig::default();
    config.grid.n = 16;
    config.scheme.t_max = 0.08;
    config.convergence.problem = ConvergenceProblem::LinearAdditive;
    config.convergence.dt_list = vec![8e-3, 4e-3, 2e-3, 1e-3];
    config.convergence.n_paths = 16;
    config.convergence.reference_factor = 8;
    convergence_study(&config)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let report = run_example()?;
    for (dt, e) in report.dts.iter().zip(&report.errors) {
        println!("dt = {dt:.1e}  rms error = {e:.3e}");
    }
    println!("slope = {:.3}", report.slope);
    Ok(())
}
