//! A small ensemble over three initial-data amplitudes with threshold stopping,
//! written to a temporary directory, and its survival curve.

use nspd::config::SolverConfig;
use nspd::runner::{cmd_ensemble, EnsembleOutcome};
use nspd::Result;

pub fn run_example() -> Result<EnsembleOutcome> {
    let mut config = SolverConfig::default();
    config.grid.n = 16;
    config.scheme.t_max = 0.2;
    config.scheme.dt = 2e-3;
    config.ensemble.amplitudes = vec![0.5, 2.0, 16.0];
    config.ensemble.survival_points = 5;
    config.stopping.thresholds = vec![12.0, 50.0, 100.0];
    let out = tempfile::tempdir()?;
    cmd_ensemble(&config, 6, None, out.path())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let outcome = run_example()?;
    for s in &outcome.samples {
        println!("traj {} R = {:>4}: {} tau = {:?}", s.traj_id, s.amplitude, s.status.as_str(), s.tau);
    }
    let curve = &outcome.survival.overall;
    for i in 0..curve.t.len() {
        println!(
            "P(tau >= {:.2}) = {:.2}  [{:.2}, {:.2}]",
            curve.t[i], curve.survival[i], curve.lower[i], curve.upper[i]
        );
    }
    Ok(())
}
