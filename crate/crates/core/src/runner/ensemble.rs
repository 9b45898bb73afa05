use std::path::Path;

use rayon::prelude::*;

use crate::config::SolverConfig;
use crate::diagnostics::{blowup_monitor, lifespan_statistics, LifespanSample, SurvivalReport};
use crate::error::{NspdError, Result};
use crate::fields::make_initial_state_scaled;
use crate::integrators::run_trajectory_with;
use crate::io::{ensemble_header, ensemble_row, survival_csv, write_text};
use crate::noise::CounterNoise;
use crate::record::Status;

use super::simulate::write_record;

/// Aggregate of an ensemble run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    /// One sample per trajectory, ordered by trajectory id.
    pub samples: Vec<LifespanSample>,
    pub statuses: Vec<Status>,
    pub survival: SurvivalReport,
}

impl EnsembleOutcome {
    /// Largest trajectory exit code.
    pub fn exit_code(&self) -> i32 {
        self.statuses.iter().map(|s| s.exit_code()).max().unwrap_or(0)
    }
}

/// Initial-data amplitude of trajectory `traj_id`.
pub fn trajectory_amplitude(config: &SolverConfig, traj_id: u64) -> f64 {
    let a = &config.ensemble.amplitudes;
    if a.is_empty() {
        1.0
    } else {
        a[traj_id as usize % a.len()]
    }
}

/// Evenly spaced survival-curve times on `[0, t_max]`.
pub fn survival_grid(config: &SolverConfig) -> Vec<f64> {
    let n = config.ensemble.survival_points.max(2);
    let t_max = config.scheme.t_max;
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

/// Run trajectories `0..n_traj` on `workers` threads (all available when `None`).
///
/// Writes `traj_<id>/` per trajectory plus `summaries.csv` and `survival.csv`; the
/// aggregated files are assembled in trajectory-id order.
pub fn cmd_ensemble(
    config: &SolverConfig,
    n_traj: usize,
    workers: Option<usize>,
    out: &Path,
) -> Result<EnsembleOutcome> {
    if n_traj == 0 {
        return Err(NspdError::Domain("an ensemble needs at least one trajectory".into()));
    }
    config.validate()?;
    let thresholds = &config.stopping.thresholds;
    let run_one = |id: u64| -> Result<(LifespanSample, String, Status)> {
        let amplitude = trajectory_amplitude(config, id);
        let initial = make_initial_state_scaled(config, amplitude)?;
        let noise = CounterNoise {
            config: config.noise.clone(),
            traj_id: id,
        };
        let record = run_trajectory_with(config, initial, &noise, id, amplitude)?;
        write_record(&record, &out.join(format!("traj_{id:05}")))?;
        let sample = blowup_monitor(&record, thresholds)?;
        let row = ensemble_row(&record, &sample);
        Ok((sample, row, record.status))
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| NspdError::Domain(format!("cannot start worker pool: {e}")))?;
    let results: Vec<(LifespanSample, String, Status)> =
        pool.install(|| (0..n_traj as u64).into_par_iter().map(run_one).collect::<Result<_>>())?;

    let mut table = ensemble_header(thresholds);
    table.push('\n');
    let mut samples = Vec::with_capacity(n_traj);
    let mut statuses = Vec::with_capacity(n_traj);
    for (sample, row, status) in results {
        table.push_str(&row);
        table.push('\n');
        samples.push(sample);
        statuses.push(status);
    }
    let survival = lifespan_statistics(&samples, &survival_grid(config))?;
    write_text(&out.join("config.toml"), &config.to_toml())?;
    write_text(&out.join("summaries.csv"), &table)?;
    write_text(&out.join("survival.csv"), &survival_csv(&survival))?;
    Ok(EnsembleOutcome {
        samples,
        statuses,
        survival,
    })
}
