//! Output of a single trajectory: per-step diagnostics, stopping times and status.

use crate::fields::SystemState;

/// Terminal state of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Completed,
    StoppedAtThreshold,
    NumericalFailure,
}

impl Status {
    /// Process exit code reported by the command-line runner.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Completed => 0,
            Status::StoppedAtThreshold => 2,
            Status::NumericalFailure => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::StoppedAtThreshold => "stopped_at_threshold",
            Status::NumericalFailure => "numerical_failure",
        }
    }
}

/// Diagnostic scalars recorded after each step (and at `t = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRow {
    pub step: usize,
    pub t: f64,
    /// `||y||_{V_alpha}`.
    pub v_alpha: f64,
    /// `||y||_{E_alpha}`.
    pub e_alpha: f64,
    /// `max_x ||d|^2 - 1|`.
    pub max_dev: f64,
    /// `||(|d|^2 - 1)_-||^2_{L^2}`.
    pub y_minus: f64,
    /// `||(|d|^2 - 1)_+||^2_{L^2}`.
    pub z_plus: f64,
    /// `||v||^2_{L^2}`.
    pub energy: f64,
    /// `max_k |k . v_k| / ||v||_{L^2}`.
    pub divergence: f64,
    /// `max_x |grad d|`.
    pub grad_d_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub state: SystemState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub config_hash: String,
    pub traj_id: u64,
    /// Initial-data amplitude `R` the trajectory was started from.
    pub amplitude: f64,
    pub alpha: f64,
    pub t_max: f64,
    pub thresholds: Vec<f64>,
    pub rows: Vec<DiagnosticRow>,
    /// First time the V_alpha norm reached each threshold; `None` if never.
    pub tau: Vec<Option<f64>>,
    pub status: Status,
    pub failure_step: Option<usize>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Option<SystemState>,
}

impl TrajectoryRecord {
    /// Time of the last recorded row.
    pub fn final_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    /// Largest `max_x ||d|^2 - 1|` over all recorded rows.
    pub fn max_constraint_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.max_dev).fold(0.0, f64::max)
    }

    /// Largest relative spectral divergence of the velocity over all rows.
    pub fn max_divergence(&self) -> f64 {
        self.rows.iter().map(|r| r.divergence).fold(0.0, f64::max)
    }
}
