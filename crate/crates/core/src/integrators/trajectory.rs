use crate::config::SolverConfig;
use crate::error::{NspdError, Result};
use crate::fields::{make_initial_state, SystemState};
use crate::noise::{CounterNoise, NoiseSource};
use crate::record::{DiagnosticRow, Snapshot, Status, TrajectoryRecord};

use super::model::Model;

/// Run one trajectory with the config's initial data and the counter-based noise of trajectory 0.
pub fn run_trajectory(config: &SolverConfig) -> Result<TrajectoryRecord> {
    let initial = make_initial_state(config)?;
    let noise = CounterNoise {
        config: config.noise.clone(),
        traj_id: 0,
    };
    run_trajectory_with(config, initial, &noise, 0, 1.0)
}

/// Update first-crossing times from one row; returns true once the largest threshold is reached.
fn record_crossings(thresholds: &[f64], tau: &mut [Option<f64>], row: &DiagnosticRow) -> bool {
    for (m, slot) in thresholds.iter().zip(tau.iter_mut()) {
        if slot.is_none() && row.v_alpha >= *m {
            *slot = Some(row.t);
        }
    }
    tau.last().is_some_and(|t| t.is_some())
}

/// Run one trajectory from `initial` driven by `noise`.
///
/// Numerical failure is recorded in the returned record; errors are reserved for invalid input.
pub fn run_trajectory_with(
    config: &SolverConfig,
    initial: SystemState,
    noise: &dyn NoiseSource,
    traj_id: u64,
    amplitude: f64,
) -> Result<TrajectoryRecord> {
    let model = Model::from_config(config)?;
    if noise.n_modes() != model.n_modes() {
        return Err(NspdError::Shape(format!(
            "noise source has {} modes, model expects {}",
            noise.n_modes(),
            model.n_modes()
        )));
    }
    if !initial.grid().same_shape(&model.grid) {
        return Err(NspdError::Shape("initial state grid differs from config grid".into()));
    }
    let thresholds = config.stopping.thresholds.clone();
    let mut record = TrajectoryRecord {
        config_hash: config.hash(),
        traj_id,
        amplitude,
        alpha: config.model.alpha,
        t_max: config.scheme.t_max,
        thresholds: thresholds.clone(),
        rows: Vec::new(),
        tau: vec![None; thresholds.len()],
        status: Status::Completed,
        failure_step: None,
        snapshots: Vec::new(),
        final_state: None,
    };
    let every = config.output.snapshots_every;
    let dt = config.scheme.dt;
    let t_max = config.scheme.t_max;
    let n_steps = config.scheme.n_steps();

    let mut y = initial;
    y.time = 0.0;
    let row = model.diagnostics(&y, 0)?;
    record.rows.push(row);
    if every > 0 {
        record.snapshots.push(Snapshot { step: 0, state: y.clone() });
    }
    if record_crossings(&thresholds, &mut record.tau, &row) {
        record.status = Status::StoppedAtThreshold;
        record.final_state = Some(y);
        return Ok(record);
    }

    for step in 1..=n_steps {
        let h = if step == n_steps { (t_max - y.time).min(dt) } else { dt };
        if h <= 0.0 {
            break;
        }
        let inc = noise.increment(step - 1, dt)?;
        // A shortened last step scales the increment to the remaining interval.
        let inc = if h < dt {
            let r = (h / dt).sqrt();
            crate::noise::NoiseIncrement {
                dw: inc.dw.iter().map(|w| w * r).collect(),
                d_eta: inc.d_eta * r,
            }
        } else {
            inc
        };
        let next = match model.step(&y, &inc, h, step) {
            Ok(s) => s,
            Err(NspdError::NumericalFailure { step }) => {
                fail(&mut record, step, y.time + h);
                return Ok(record);
            }
            Err(e) => return Err(e),
        };
        y = next;
        let row = model.diagnostics(&y, step)?;
        if !(row.v_alpha.is_finite() && row.e_alpha.is_finite()) {
            fail(&mut record, step, y.time);
            return Ok(record);
        }
        record.rows.push(row);
        if every > 0 && step % every == 0 {
            record.snapshots.push(Snapshot { step, state: y.clone() });
        }
        if record_crossings(&thresholds, &mut record.tau, &row) {
            record.status = Status::StoppedAtThreshold;
            break;
        }
    }
    record.final_state = Some(y);
    Ok(record)
}

/// Advance `y0` by `n_steps` steps of size `dt` without recording diagnostics.
/// `observe` sees every new state.
pub fn integrate(
    model: &Model,
    y0: &SystemState,
    noise: &dyn NoiseSource,
    dt: f64,
    n_steps: usize,
    mut observe: impl FnMut(usize, &SystemState),
) -> Result<SystemState> {
    let mut y = y0.clone();
    for step in 1..=n_steps {
        let inc = noise.increment(step - 1, dt)?;
        y = model.step(&y, &inc, dt, step)?;
        observe(step, &y);
    }
    Ok(y)
}

/// Failure counts as reaching every threshold not yet crossed.
fn fail(record: &mut TrajectoryRecord, step: usize, t: f64) {
    record.status = Status::NumericalFailure;
    record.failure_step = Some(step);
    for slot in record.tau.iter_mut().filter(|s| s.is_none()) {
        *slot = Some(t);
    }
}
