use std::path::Path;

use crate::config::SolverConfig;
use crate::error::Result;
use crate::integrators::run_trajectory;
use crate::io::{diagnostics_csv, summary_csv, write_snapshot, write_text};
use crate::record::TrajectoryRecord;
use crate::spectral::to_physical;

/// Write a record's tables and snapshots under `dir`.
pub(crate) fn write_record(record: &TrajectoryRecord, dir: &Path) -> Result<()> {
    write_text(&dir.join("diagnostics.csv"), &diagnostics_csv(record))?;
    write_text(&dir.join("summary.csv"), &summary_csv(record))?;
    for snap in &record.snapshots {
        let stem = format!("step_{:08}", snap.step);
        write_snapshot(&to_physical(&snap.state.v), &dir.join("snapshots").join(format!("{stem}_v.nspd")))?;
        write_snapshot(&to_physical(&snap.state.d), &dir.join("snapshots").join(format!("{stem}_d.nspd")))?;
    }
    Ok(())
}

/// Run trajectory 0 of `config` and write `config.toml`, `diagnostics.csv`,
/// `summary.csv` and `snapshots/` under `out`. The exit code is `record.status.exit_code()`.
pub fn cmd_simulate(config: &SolverConfig, out: &Path) -> Result<TrajectoryRecord> {
    let record = run_trajectory(config)?;
    write_text(&out.join("config.toml"), &config.to_toml())?;
    write_record(&record, out)?;
    Ok(record)
}
