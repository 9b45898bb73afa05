use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::config::{ConvergenceProblem, SolverConfig};
use crate::diagnostics::constraint_report;
use crate::error::{NspdError, Result, Violation};
use crate::fields::{make_initial_state, product_norm, SpaceLevel, SpaceTag, SystemState};
use crate::integrators::{integrate, log_log_slope, Model};
use crate::io::{fmt_f64, write_text};
use crate::noise::{brownian_bridge_refine, BrownianPath};

/// Errors of one convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: ConvergenceProblem,
    pub dts: Vec<f64>,
    /// Root-mean-square over paths of the per-path error at `t_max`.
    pub errors: Vec<f64>,
    /// Step of the reference run; `None` when the measure needs no reference.
    pub reference_dt: Option<f64>,
    pub n_paths: usize,
    /// Least-squares slope of `log error` against `log dt`.
    pub slope: f64,
}

fn invalid(field: &str, constraint: &str, value: impl std::fmt::Display) -> NspdError {
    NspdError::Validation(vec![Violation {
        field: field.into(),
        constraint: constraint.into(),
        value: value.to_string(),
    }])
}

/// Number of whole steps of size `dt` in `t_max`.
fn whole_steps(t_max: f64, dt: f64) -> Result<usize> {
    let n = t_max / dt;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-9 * r {
        return Err(invalid("convergence.dt_list", "every step must divide t_max", dt));
    }
    Ok(r as usize)
}

/// The dt list must have at least four entries, each half the previous one.
pub fn validate_dt_list(dts: &[f64]) -> Result<()> {
    if dts.len() < 4 {
        return Err(invalid("convergence.dt_list", "needs at least 4 entries", format!("{dts:?}")));
    }
    if dts.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(invalid("convergence.dt_list", "entries must be positive", format!("{dts:?}")));
    }
    if dts.windows(2).any(|w| (w[0] / w[1] - 2.0).abs() > 1e-9) {
        return Err(invalid("convergence.dt_list", "each step must halve the previous one", format!("{dts:?}")));
    }
    Ok(())
}

/// The configuration actually integrated for `problem`.
pub fn problem_config(config: &SolverConfig, problem: ConvergenceProblem) -> SolverConfig {
    let mut c = config.clone();
    match problem {
        ConvergenceProblem::LinearAdditive => {
            c.model.linearized = true;
            c.noise.multiplicative_gain = 0.0;
            c.magnetic.amplitudes.iter_mut().for_each(|a| *a = [0.0; 3]);
        }
        ConvergenceProblem::Deterministic => {
            c.noise.sigma = 0.0;
            c.magnetic.amplitudes.iter_mut().for_each(|a| *a = [0.0; 3]);
        }
        ConvergenceProblem::ConstraintDrift => {
            c.scheme.renormalize_director = false;
        }
    }
    c
}

/// Errors at `t_max` for each step of `config.convergence.dt_list`.
///
/// Every path is sampled at the finest step and summed for the coarser ones. The state
/// problems compare against the same scheme on the bridge-refined path; the constraint
/// problem measures `max_x ||d|^2 - 1|` directly.
pub fn convergence_study(config: &SolverConfig) -> Result<ConvergenceReport> {
    let conv = &config.convergence;
    let problem = conv.problem;
    let dts = conv.dt_list.clone();
    validate_dt_list(&dts)?;
    if conv.n_paths == 0 {
        return Err(invalid("convergence.n_paths", "must be at least 1", 0));
    }
    if conv.reference_factor == 0 || !conv.reference_factor.is_power_of_two() {
        return Err(invalid("convergence.reference_factor", "must be a power of two", conv.reference_factor));
    }
    let cfg = problem_config(config, problem);
    cfg.validate()?;
    let t_max = cfg.scheme.t_max;
    let finest = *dts.last().expect("validated non-empty");
    let n_fine = whole_steps(t_max, finest)?;
    for &dt in &dts {
        whole_steps(t_max, dt)?;
    }
    let model = Model::from_config(&cfg)?;
    let y0 = make_initial_state(&cfg)?;
    let tag = SpaceTag::new(SpaceLevel::V, cfg.model.alpha);
    let needs_reference = problem != ConvergenceProblem::ConstraintDrift;
    let n_paths = if problem == ConvergenceProblem::Deterministic { 1 } else { conv.n_paths };

    let run = |path: &BrownianPath| -> Result<SystemState> {
        integrate(&model, &y0, path, path.dt, path.len(), |_, _| {})
    };
    let per_path: Vec<Vec<f64>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let fine = BrownianPath::sample(&cfg.noise, p, n_fine, finest)?;
            let reference = if needs_reference {
                Some(run(&brownian_bridge_refine(&fine, conv.reference_factor)?)?)
            } else {
                None
            };
            dts.iter()
                .map(|&dt| {
                    let factor = (dt / finest).round() as usize;
                    let y = run(&fine.coarsen(factor)?)?;
                    match &reference {
                        Some(r) => product_norm(&y.combine(1.0, r, -1.0), tag),
                        None => Ok(constraint_report(&y.d, y.time)?.max_pointwise_dev),
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = (0..dts.len())
        .map(|i| (per_path.iter().map(|e| e[i] * e[i]).sum::<f64>() / n_paths as f64).sqrt())
        .collect();
    let slope = log_log_slope(&dts, &errors);
    Ok(ConvergenceReport {
        problem,
        dts,
        errors,
        reference_dt: needs_reference.then(|| finest / conv.reference_factor as f64),
        n_paths,
        slope,
    })
}

pub fn problem_name(p: ConvergenceProblem) -> &'static str {
    match p {
        ConvergenceProblem::LinearAdditive => "linear_additive",
        ConvergenceProblem::Deterministic => "deterministic",
        ConvergenceProblem::ConstraintDrift => "constraint_drift",
    }
}

/// Run the sweep and write `convergence.csv` and `convergence_summary.csv` under `out`.
pub fn cmd_convergence(config: &SolverConfig, out: &Path) -> Result<ConvergenceReport> {
    let report = convergence_study(config)?;
    let mut table = String::from("dt[time],error[norm]\n");
    for (dt, e) in report.dts.iter().zip(&report.errors) {
        let _ = writeln!(table, "{},{}", fmt_f64(*dt), fmt_f64(*e));
    }
    let mut summary = String::from("key[-],value[-]\n");
    let _ = writeln!(summary, "config_hash,{}", config.hash());
    let _ = writeln!(summary, "problem,{}", problem_name(report.problem));
    let _ = writeln!(summary, "n_paths,{}", report.n_paths);
    let _ = writeln!(
        summary,
        "reference_dt,{}",
        report.reference_dt.map_or_else(String::new, fmt_f64)
    );
    let _ = writeln!(summary, "slope,{}", fmt_f64(report.slope));
    write_text(&out.join("config.toml"), &config.to_toml())?;
    write_text(&out.join("convergence.csv"), &table)?;
    write_text(&out.join("convergence_summary.csv"), &summary)?;
    Ok(report)
}
