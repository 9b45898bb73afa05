use std::collections::BTreeMap;

use crate::error::{NspdError, Result};
use crate::record::{Status, TrajectoryRecord};

/// Standard normal quantile of the two-sided 95% Wilson interval.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifespanStatus {
    Completed,
    Stopped,
    Failed,
}

impl LifespanStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LifespanStatus::Completed => "completed",
            LifespanStatus::Stopped => "stopped",
            LifespanStatus::Failed => "failed",
        }
    }
}

/// Threshold-crossing times of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct LifespanSample {
    pub traj_id: u64,
    pub amplitude: f64,
    pub thresholds: Vec<f64>,
    /// First time the V_alpha norm reached each threshold; `None` if never.
    pub tau: Vec<Option<f64>>,
    pub status: LifespanStatus,
    /// Last time the trajectory was observed.
    pub t_end: f64,
}

impl LifespanSample {
    /// Crossing time of the largest threshold; `None` means the trajectory survived.
    pub fn tau_top(&self) -> Option<f64> {
        self.tau.last().copied().flatten()
    }
}

/// First crossing of each threshold read off the per-row V_alpha norms.
///
/// A numerical failure counts as crossing every threshold not yet reached at the
/// failure time. The sample is stopped iff the largest threshold was crossed before `t_max`.
pub fn blowup_monitor(record: &TrajectoryRecord, thresholds: &[f64]) -> Result<LifespanSample> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(NspdError::Domain("thresholds must be strictly increasing".into()));
    }
    let mut tau: Vec<Option<f64>> = vec![None; thresholds.len()];
    for row in &record.rows {
        for (m, slot) in thresholds.iter().zip(tau.iter_mut()) {
            if slot.is_none() && row.v_alpha >= *m {
                *slot = Some(row.t);
            }
        }
    }
    let mut t_end = record.final_time();
    let status = if record.status == Status::NumericalFailure {
        let t_fail = record
            .tau
            .iter()
            .flatten()
            .copied()
            .fold(t_end, f64::max);
        t_end = t_fail;
        for slot in tau.iter_mut().filter(|s| s.is_none()) {
            *slot = Some(t_fail);
        }
        LifespanStatus::Failed
    } else if tau.last().copied().flatten().is_some_and(|t| t < record.t_max) {
        LifespanStatus::Stopped
    } else {
        LifespanStatus::Completed
    };
    Ok(LifespanSample {
        traj_id: record.traj_id,
        amplitude: record.amplitude,
        thresholds: thresholds.to_vec(),
        tau,
        status,
        t_end,
    })
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Empirical `P(tau_top >= t)` on a time grid with Wilson intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalCurve {
    pub n: usize,
    pub t: Vec<f64>,
    pub survival: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SurvivalCurve {
    fn from_samples(samples: &[&LifespanSample], t_grid: &[f64]) -> Self {
        let n = samples.len();
        let mut curve = SurvivalCurve {
            n,
            t: t_grid.to_vec(),
            survival: Vec::with_capacity(t_grid.len()),
            lower: Vec::with_capacity(t_grid.len()),
            upper: Vec::with_capacity(t_grid.len()),
        };
        for &t in t_grid {
            let k = samples
                .iter()
                .filter(|s| s.tau_top().is_none_or(|tau| tau >= t))
                .count();
            let (lo, hi) = wilson_interval(k, n, WILSON_Z);
            curve.survival.push(k as f64 / n as f64);
            curve.lower.push(lo);
            curve.upper.push(hi);
        }
        curve
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalReport {
    pub overall: SurvivalCurve,
    /// One curve per initial-data amplitude, in increasing amplitude.
    pub by_amplitude: Vec<(f64, SurvivalCurve)>,
}

pub fn lifespan_statistics(samples: &[LifespanSample], t_grid: &[f64]) -> Result<SurvivalReport> {
    if samples.is_empty() {
        return Err(NspdError::Domain("lifespan statistics need at least one sample".into()));
    }
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(NspdError::Domain("time grid must be strictly increasing".into()));
    }
    let all: Vec<&LifespanSample> = samples.iter().collect();
    let mut groups: BTreeMap<u64, Vec<&LifespanSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(order_key(s.amplitude)).or_default().push(s);
    }
    Ok(SurvivalReport {
        overall: SurvivalCurve::from_samples(&all, t_grid),
        by_amplitude: groups
            .into_values()
            .map(|g| (g[0].amplitude, SurvivalCurve::from_samples(&g, t_grid)))
            .collect(),
    })
}

/// Order-preserving map of finite floats to integers.
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Pathwise check of `y_minus(t) <= y_minus(0) + tol` on the event `sup |grad d| <= n_bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub n_bound: f64,
    pub tol: f64,
    pub checked: usize,
    /// Trajectories outside the event, by id.
    pub excluded: Vec<u64>,
    /// `max_t (y_minus(t) - y_minus(0))` over the checked trajectories.
    pub max_excess: f64,
}

impl GronwallReport {
    pub fn passed(&self) -> bool {
        self.max_excess <= self.tol
    }
}

pub fn gronwall_check(records: &[TrajectoryRecord], n_bound: f64, tol: f64) -> GronwallReport {
    let mut report = GronwallReport {
        n_bound,
        tol,
        checked: 0,
        excluded: Vec::new(),
        max_excess: f64::NEG_INFINITY,
    };
    for r in records {
        let sup = r.rows.iter().map(|row| row.grad_d_sup).fold(0.0, f64::max);
        if !(sup <= n_bound) || r.rows.is_empty() {
            report.excluded.push(r.traj_id);
            continue;
        }
        report.checked += 1;
        let y0 = r.rows[0].y_minus;
        let excess = r.rows.iter().map(|row| row.y_minus - y0).fold(f64::NEG_INFINITY, f64::max);
        report.max_excess = report.max_excess.max(excess);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::DiagnosticRow;

    fn row(step: usize, t: f64, v: f64) -> DiagnosticRow {
        DiagnosticRow {
            step,
            t,
            v_alpha: v,
            e_alpha: v,
            max_dev: 0.0,
            y_minus: 0.0,
            z_plus: 0.0,
            energy: 0.0,
            divergence: 0.0,
            grad_d_sup: 0.0,
        }
    }

    pub(crate) fn synthetic(norm: impl Fn(f64) -> f64, dt: f64, t_max: f64, status: Status) -> TrajectoryRecord {
        let n = (t_max / dt).round() as usize;
        TrajectoryRecord {
            config_hash: String::new(),
            traj_id: 0,
            amplitude: 1.0,
            alpha: 2.0,
            t_max,
            thresholds: vec![],
            rows: (0..=n).map(|i| row(i, i as f64 * dt, norm(i as f64 * dt))).collect(),
            tau: vec![],
            status,
            failure_step: None,
            snapshots: vec![],
            final_state: None,
        }
    }

    #[test]
    fn constant_norm_has_no_crossings() {
        let r = synthetic(|_| 0.5, 0.1, 1.0, Status::Completed);
        let s = blowup_monitor(&r, &[1.0, 2.0]).unwrap();
        assert_eq!(s.tau, vec![None, None]);
        assert_eq!(s.status, LifespanStatus::Completed);
    }

    #[test]
    fn inverse_blowup_crossings_are_exact() {
        let r = synthetic(|t| 1.0 / (1.0 - t), 1.0 / 1024.0, 0.99609375, Status::StoppedAtThreshold);
        let s = blowup_monitor(&r, &[2.0, 4.0, 8.0]).unwrap();
        assert_eq!(s.tau, vec![Some(0.5), Some(0.75), Some(0.875)]);
        assert_eq!(s.status, LifespanStatus::Stopped);
    }

    #[test]
    fn wilson_matches_reference_values() {
        let (lo, hi) = wilson_interval(8, 10, WILSON_Z);
        assert!((lo - 0.4901624).abs() < 1e-6 && (hi - 0.9433178).abs() < 1e-6);
        assert!((wilson_interval(10, 10, WILSON_Z).1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn survival_counts_known_taus() {
        let mk = |id: u64, amp: f64, tau: Option<f64>| LifespanSample {
            traj_id: id,
            amplitude: amp,
            thresholds: vec![1.0],
            tau: vec![tau],
            status: if tau.is_some() { LifespanStatus::Stopped } else { LifespanStatus::Completed },
            t_end: tau.unwrap_or(1.0),
        };
        let s = vec![mk(0, 1.0, Some(0.2)), mk(1, 1.0, None), mk(2, 2.0, Some(0.5)), mk(3, 2.0, Some(0.9))];
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let rep = lifespan_statistics(&s, &grid).unwrap();
        assert_eq!(rep.overall.survival, vec![1.0, 0.75, 0.75, 0.5, 0.25]);
        assert_eq!(rep.by_amplitude.len(), 2);
        assert_eq!(rep.by_amplitude[0].0, 1.0);
        assert_eq!(rep.by_amplitude[1].1.survival, vec![1.0, 1.0, 1.0, 0.5, 0.0]);
        assert!(lifespan_statistics(&[], &grid).is_err());
    }

    #[test]
    fn gronwall_excludes_large_gradients() {
        let mut a = synthetic(|_| 1.0, 0.1, 0.3, Status::Completed);
        for (i, r) in a.rows.iter_mut().enumerate() {
            r.y_minus = 1.0 - 0.1 * i as f64;
        }
        let mut b = a.clone();
        b.traj_id = 1;
        b.rows[2].grad_d_sup = 50.0;
        b.rows[2].y_minus = 5.0;
        let rep = gronwall_check(&[a, b], 10.0, 1e-12);
        assert_eq!(rep.checked, 1);
        assert_eq!(rep.excluded, vec![1]);
        assert!(rep.passed());
    }
}
