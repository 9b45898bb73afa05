//! One noisy trajectory with director renormalization, printing a few diagnostic rows.

use nspd::config::SolverConfig;
use nspd::integrators::run_trajectory;
use nspd::record::TrajectoryRecord;
use nspd::Result;

pub fn run_example() -> Result<TrajectoryRecord> {
    let mut config = SolverConfig::default();
    config.grid.n = 32;
    config.scheme.t_max = 0.2;
    config.scheme.dt = 2e-3;
    config.scheme.renormalize_director = true;
    run_trajectory(&config)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let record = run_example()?;
    println!("{:>6} {:>8} {:>12} {:>12} {:>10}", "step", "t", "|y|_V", "max_dev", "div");
    for row in record.rows.iter().step_by(20) {
        println!(
            "{:>6} {:>8.3} {:>12.6} {:>12.2e} {:>10.2e}",
            row.step, row.t, row.v_alpha, row.max_dev, row.divergence
        );
    }
    println!("status: {}", record.status.as_str());
    Ok(())
}
