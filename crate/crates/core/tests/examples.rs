//! Every crate example runs and reports what it claims.

#[path = "../examples/brownian_paths.rs"]
mod brownian_paths;
#[path = "../examples/check_battery.rs"]
mod check_battery;
#[path = "../examples/convergence_sweep.rs"]
mod convergence_sweep;
#[path = "../examples/estimate_ratios.rs"]
mod estimate_ratios;
#[path = "../examples/lifespan_ensemble.rs"]
mod lifespan_ensemble;
#[path = "../examples/nonlinear_terms.rs"]
mod nonlinear_terms;
#[path = "../examples/picard_mild.rs"]
mod picard_mild;
#[path = "../examples/simulate_trajectory.rs"]
mod simulate_trajectory;
#[path = "../examples/spectral_calculus.rs"]
mod spectral_calculus;

use nspd::record::Status;

#[test]
fn spectral_calculus_example() {
    let s = spectral_calculus::run_example().unwrap();
    assert!(s.taylor_green_divergence < 1e-14);
    assert!(s.projected_gradient < 1e-12);
    assert!((s.decay_factor - (-1.0f64).exp()).abs() < 1e-12);
}

#[test]
fn nonlinear_terms_example() {
    let s = nonlinear_terms::run_example().unwrap();
    assert!(s.taylor_green_convection < 1e-12);
    assert!(s.planar_director_stress < 1e-12);
    assert!(s.ginzburg > 0.0 && s.noise_g > 0.0);
}

#[test]
fn brownian_paths_example() {
    let s = brownian_paths::run_example().unwrap();
    assert!(s.refine_round_trip < 1e-12);
    assert!((s.eta_variance_ratio - 1.0).abs() < 0.1);
    assert!(s.growth_constant.is_finite() && s.growth_constant > 0.0);
}

#[test]
fn simulate_trajectory_example() {
    let r = simulate_trajectory::run_example().unwrap();
    assert_eq!(r.status, Status::Completed);
    assert_eq!(r.rows.len(), 101);
    assert!(r.max_constraint_deviation() < 1e-12);
}

#[test]
fn picard_mild_example() {
    let s = picard_mild::run_example().unwrap();
    assert!(s.residuals[4] / s.residuals[0] < 1e-2);
    assert!(s.stepper_gap < 1e-3);
}

#[test]
fn lifespan_ensemble_example() {
    let o = lifespan_ensemble::run_example().unwrap();
    assert_eq!(o.samples.len(), 6);
    let curve = &o.survival.overall;
    assert_eq!(curve.survival[0], 1.0);
    assert!(curve.survival.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn estimate_ratios_example() {
    let (suite, psi) = estimate_ratios::run_example().unwrap();
    assert!(suite.all_finite());
    assert!(psi.windows(2).all(|w| w[1].psi >= w[0].psi));
    assert!(psi.last().unwrap().gap() < 1e-6);
}

#[test]
fn convergence_sweep_example() {
    let r = convergence_sweep::run_example().unwrap();
    assert!(r.slope > 0.8, "slope {}", r.slope);
}

#[test]
fn check_battery_example() {
    let r = check_battery::run_example().unwrap();
    assert!(r.passed(), "{}", r.render());
}
