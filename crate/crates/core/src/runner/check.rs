use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::diagnostics::{
    blowup_monitor, lemma_ratio_suite, psi_sweep, vector_identity_checks, LifespanStatus,
};
use crate::error::Result;
use crate::fields::make_initial_state;
use crate::integrators::{rotate_point, run_trajectory, weak_consistency, Model, WeakConsistencySetup};
use crate::nonlinear::{convective_b, ericksen_stress_m};
use crate::record::{DiagnosticRow, Status, TrajectoryRecord};
use crate::spectral::{
    dealias, divergence_ratio, leray_project, random_field, semigroup_apply, sobolev_norm,
    to_physical, FractionalExponent, Grid, Semigroup,
};

/// How a metric is judged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// Reported only.
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
}

impl Metric {
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost(b) => self.value <= b,
            Bound::AtLeast(b) => self.value >= b,
            Bound::Report => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub metrics: Vec<Metric>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            metrics: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, value: f64, bound: Bound) {
        self.metrics.push(Metric {
            name: name.into(),
            value,
            bound,
        });
    }

    pub fn passed(&self) -> bool {
        self.metrics.iter().all(Metric::passed)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// One line per suite followed by its metrics.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for suite in &self.suites {
            let verdict = if suite.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "[{verdict}] {}", suite.name);
            for m in &suite.metrics {
                let bound = match m.bound {
                    Bound::AtMost(b) => format!("<= {b:e}"),
                    Bound::AtLeast(b) => format!(">= {b:e}"),
                    Bound::Report => "reported".into(),
                };
                let mark = if m.passed() { "ok" } else { "FAILED" };
                let _ = writeln!(s, "    {:<32} {:>14.6e}  ({bound}) {mark}", m.name, m.value);
            }
        }
        let _ = writeln!(s, "overall: {}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

/// Sample sizes of the check battery.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    /// Random points for the rotation isometry.
    pub rotation_samples: usize,
    /// Paths of the single-point weak consistency comparison.
    pub weak_paths: usize,
    /// Random samples per estimate ratio suite.
    pub ratio_samples: usize,
    /// Steps of the short trajectory run.
    pub trajectory_steps: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            rotation_samples: 100_000,
            weak_paths: 10_000,
            ratio_samples: 100,
            trajectory_steps: 50,
        }
    }
}

fn spectral_suite(grid: Grid, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("spectral");
    let band = (grid.n() / 3) as i64;
    let f = random_field(grid, grid.dim(), band, 1.0, rng);
    let phys = to_physical(&f).l2_norm();
    s.push("parseval_rel", (phys - f.l2_norm()).abs() / f.l2_norm(), Bound::AtMost(1e-12));

    let p = leray_project(&f)?;
    s.push("projection_idempotence", (&leray_project(&p)? - &p).l2_norm() / f.l2_norm(), Bound::AtMost(1e-14));
    s.push("projection_divergence", divergence_ratio(&p)? * p.l2_norm() / f.l2_norm(), Bound::AtMost(1e-12));

    let mut law: f64 = 0.0;
    let mut contraction: f64 = 0.0;
    for which in [Semigroup::Stokes, Semigroup::Heat] {
        let x = if which == Semigroup::Stokes { p.clone() } else { f.clone() };
        for t in [0.1, 0.7] {
            for r in [0.1, 0.7] {
                let two = semigroup_apply(&semigroup_apply(&x, t, which)?, r, which)?;
                let one = semigroup_apply(&x, t + r, which)?;
                law = law.max((&two - &one).l2_norm() / x.l2_norm());
            }
            contraction = contraction.max(semigroup_apply(&x, t, which)?.l2_norm() / x.l2_norm());
        }
    }
    s.push("semigroup_law", law, Bound::AtMost(1e-13));
    s.push("contraction_ratio", contraction, Bound::AtMost(1.0));
    Ok(s)
}

fn nonlinear_suite(grid: Grid, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("nonlinear");
    let dim = grid.dim();
    let band = (grid.n() / 3) as i64;
    let u = leray_project(&random_field(grid, dim, band, 1.0, rng))?;
    let v = dealias(&leray_project(&random_field(grid, dim, band, 1.0, rng))?);
    let b = convective_b(&u, &v)?;
    s.push("b_divergence", divergence_ratio(&b)?, Bound::AtMost(1e-12));
    let scale = u.l2_norm() * v.l2_norm().powi(2);
    s.push("b_energy_orthogonality", b.inner(&v).abs() / scale, Bound::AtMost(1e-11));

    let d = random_field(grid, 3, band, 1.0, rng);
    let m = random_field(grid, 3, band, 1.0, rng);
    let stress = ericksen_stress_m(&d, &m)?;
    s.push("m_divergence", divergence_ratio(&stress)?, Bound::AtMost(1e-12));

    let mut ortho: f64 = 0.0;
    let mut ident: f64 = 0.0;
    for _ in 0..1000 {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let h: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let axh = crate::nonlinear::cross(a, h);
        let g2 = crate::nonlinear::cross(axh, h);
        let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        let sc = dot(a, a) * dot(h, h);
        ortho = ortho.max(dot(a, axh).abs() / sc.sqrt().max(f64::MIN_POSITIVE));
        ident = ident.max((dot(a, g2) + dot(axh, axh)).abs() / sc.max(f64::MIN_POSITIVE));
    }
    s.push("d_dot_d_cross_h", ortho, Bound::AtMost(1e-14));
    s.push("cross_square_identity", ident, Bound::AtMost(1e-14));
    Ok(s)
}

fn noise_suite(config: &SolverConfig, opts: &CheckOptions, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("noise");
    let mut worst: f64 = 0.0;
    for _ in 0..opts.rotation_samples {
        let d: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let h: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let de = rng.random_range(-1.0..1.0);
        let r = rotate_point(d, h, de, 1.0);
        let n0 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let n1 = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        worst = worst.max((n1 - n0).abs() / n0.max(f64::MIN_POSITIVE));
    }
    s.push("rotation_norm_defect", worst, Bound::AtMost(1e-14));

    let model = Model::from_config(config)?;
    let y = make_initial_state(config)?;
    let dw: Vec<f64> = (0..model.n_modes()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let q = model.velocity_noise.apply(&y.v, &dw)?;
    s.push("velocity_noise_divergence", divergence_ratio(&q)?, Bound::AtMost(1e-12));
    Ok(s)
}

fn weak_suite(config: &SolverConfig, opts: &CheckOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("ito_stratonovich");
    let setup = WeakConsistencySetup {
        n_paths: opts.weak_paths,
        seed: config.noise.seed,
        sign: config.model.cross_convention.sign(),
        correction_sign: config.scheme.ito_correction_sign,
        ..Default::default()
    };
    let w = weak_consistency(&setup)?;
    for (dt, m) in w.dts.iter().zip(&w.mean_diff) {
        s.push(format!("weak_diff[dt={dt}]"), m.abs(), Bound::Report);
    }
    s.push("weak_slope", w.slope, Bound::AtLeast(0.9));
    Ok(s)
}

/// Record whose V norm is `1/(1-t)` on a dyadic grid, stopped just before the blowup time.
pub fn inverse_blowup_record() -> TrajectoryRecord {
    let dt = 1.0 / 1024.0;
    let n = 1020;
    let rows = (0..=n)
        .map(|i| {
            let t = i as f64 * dt;
            DiagnosticRow {
                step: i,
                t,
                v_alpha: 1.0 / (1.0 - t),
                e_alpha: 1.0 / (1.0 - t),
                max_dev: 0.0,
                y_minus: 0.0,
                z_plus: 0.0,
                energy: 0.0,
                divergence: 0.0,
                grad_d_sup: 0.0,
            }
        })
        .collect();
    TrajectoryRecord {
        config_hash: String::new(),
        traj_id: 0,
        amplitude: 1.0,
        alpha: 2.0,
        t_max: 1.0,
        thresholds: vec![2.0, 4.0, 8.0],
        rows,
        tau: vec![Some(0.5), Some(0.75), Some(0.875)],
        status: Status::StoppedAtThreshold,
        failure_step: None,
        snapshots: Vec::new(),
        final_state: None,
    }
}

/// Small config whose director modulus makes the explicit drift overflow within a few steps.
pub fn failing_config() -> SolverConfig {
    let mut c = SolverConfig::default();
    c.grid.n = 16;
    c.scheme.dt = 1e-2;
    c.scheme.t_max = 1.0;
    c.initial.director_modulus = 1e3;
    c.stopping.thresholds = vec![1e300];
    c
}

fn non_decreasing(tau: &[Option<f64>]) -> bool {
    let mut prev = f64::NEG_INFINITY;
    let mut seen_none = false;
    for t in tau {
        match t {
            Some(x) => {
                if seen_none || *x < prev {
                    return false;
                }
                prev = *x;
            }
            None => seen_none = true,
        }
    }
    true
}

fn stopping_suite(short_run: &TrajectoryRecord) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("stopping");
    let synth = inverse_blowup_record();
    let sample = blowup_monitor(&synth, &[2.0, 4.0, 8.0])?;
    let expect = [0.5, 0.75, 0.875];
    let err = sample
        .tau
        .iter()
        .zip(expect)
        .map(|(t, e)| t.map_or(f64::INFINITY, |x| (x - e).abs()))
        .fold(0.0, f64::max);
    s.push("synthetic_crossing_error", err, Bound::AtMost(0.0));
    s.push("short_run_tau_monotone", non_decreasing(&short_run.tau) as u8 as f64, Bound::AtLeast(1.0));

    let failed = run_trajectory(&failing_config())?;
    let fsample = blowup_monitor(&failed, &failed.thresholds)?;
    let reported_failure = failed.status == Status::NumericalFailure && fsample.status == LifespanStatus::Failed;
    s.push("failure_reported", reported_failure as u8 as f64, Bound::AtLeast(1.0));
    s.push("failure_tau_monotone", non_decreasing(&fsample.tau) as u8 as f64, Bound::AtLeast(1.0));
    Ok(s)
}

fn psi_suite(grid: Grid, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("psi");
    let d = random_field(grid, 3, 4, 1.0, rng);
    let d = d.scaled(1.5 / to_physical(&d).sup_norm());
    let ells: Vec<f64> = (0..=10).map(|i| 10f64.powf(i as f64 * 0.5)).collect();
    let sweep = psi_sweep(&d, &ells)?;
    let increases = sweep.windows(2).filter(|w| w[1].gap() > w[0].gap()).count();
    s.push("sweep_gap_increases", increases as f64, Bound::AtMost(0.0));
    let at = sweep.iter().find(|p| p.ell == 1e4).expect("1e4 is in the sweep");
    s.push("gap_at_1e4", at.gap(), Bound::AtMost(1e-6));
    s.push("y_minus", at.y_minus, Bound::Report);
    Ok(s)
}

fn identity_suite(grid: Grid, rng: &mut ChaCha8Rng) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("identities");
    let d = random_field(grid, 3, 5, 0.5, rng);
    let h2 = sobolev_norm(&d, FractionalExponent::new(2.0)?).powi(2);
    let r = vector_identity_checks(&d)?;
    s.push("grad_identity_rel", r.gradient / h2, Bound::AtMost(1e-8));
    s.push("laplacian_identity_rel", r.laplacian / h2, Bound::AtMost(1e-8));
    Ok(s)
}

fn ratio_suite(config: &SolverConfig, grid: Grid, opts: &CheckOptions) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("estimate_ratios");
    let alpha = config.model.alpha;
    let a = lemma_ratio_suite(grid, opts.ratio_samples, alpha, config.noise.seed)?;
    let b = lemma_ratio_suite(grid, opts.ratio_samples, alpha, config.noise.seed + 1)?;
    s.push("all_finite", (a.all_finite() && b.all_finite()) as u8 as f64, Bound::AtLeast(1.0));
    s.push("seed_spread", a.max_spread(&b), Bound::AtMost(3.0));
    s.push(
        "homogeneity_defect",
        a.homogeneity_defect.max(b.homogeneity_defect),
        Bound::AtMost(1e-12),
    );
    for e in &a.entries {
        let label = match e.name {
            "product" => "c0[product]".to_string(),
            "semigroup_stokes" | "semigroup_heat" => format!("M[{}]", e.name),
            other => format!("C[{other}]"),
        };
        s.push(label, e.max_ratio, Bound::Report);
    }
    Ok(s)
}

fn trajectory_suite(short_run: &TrajectoryRecord) -> SuiteResult {
    let mut s = SuiteResult::new("trajectory");
    s.push("max_divergence_ratio", short_run.max_divergence(), Bound::AtMost(1e-12));
    s.push("max_constraint_dev", short_run.max_constraint_deviation(), Bound::AtMost(1e-12));
    s.push("steps", short_run.rows.len().saturating_sub(1) as f64, Bound::Report);
    s
}

/// Short renormalized run of `config` used by the trajectory and stopping suites.
fn short_run(config: &SolverConfig, steps: usize) -> Result<TrajectoryRecord> {
    let mut c = config.clone();
    c.scheme.renormalize_director = true;
    c.scheme.t_max = c.scheme.dt * steps.max(1) as f64;
    run_trajectory(&c)
}

/// Run every invariant suite on the config's grid and parameters.
///
/// The Ito/Stratonovich suite uses `config.scheme.ito_correction_sign`, so a
/// config with the sign flipped to `-1` makes that suite fail.
pub fn cmd_check(config: &SolverConfig, opts: &CheckOptions) -> Result<CheckReport> {
    config.validate()?;
    let grid = config.build_grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.noise.seed);
    let run = short_run(config, opts.trajectory_steps)?;
    let suites = vec![
        spectral_suite(grid, &mut rng)?,
        nonlinear_suite(grid, &mut rng)?,
        noise_suite(config, opts, &mut rng)?,
        weak_suite(config, opts)?,
        stopping_suite(&run)?,
        psi_suite(grid, &mut rng)?,
        identity_suite(grid, &mut rng)?,
        ratio_suite(config, grid, opts)?,
        trajectory_suite(&run),
    ];
    Ok(CheckReport { suites })
}
