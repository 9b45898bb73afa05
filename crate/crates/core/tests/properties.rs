//! Invariants checked over random inputs.

use nspd::config::{CrossConvention, SolverConfig};
use nspd::diagnostics::{blowup_monitor, mollifier, psi_sweep, wilson_interval, WILSON_Z};
use nspd::integrators::rotate_point;
use nspd::io::fmt_f64;
use nspd::noise::{brownian_bridge_refine, BrownianPath, NoiseIncrement};
use nspd::nonlinear::{convective_b, director_noise_g};
use nspd::record::{DiagnosticRow, Status, TrajectoryRecord};
use nspd::spectral::{
    dealias, divergence_ratio, leray_project, random_field, semigroup_apply, sobolev_norm, to_physical,
    to_spectral, FractionalExponent, Grid, PhysicalField, Semigroup, SpectralField,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(dim: usize, n: usize, comps: usize, seed: u64) -> SpectralField {
    let grid = Grid::new(dim, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field(grid, comps, (n / 4) as i64, 1.5, &mut rng)
}

fn max_abs_diff(a: &PhysicalField, b: &PhysicalField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn l2(f: &SpectralField) -> f64 {
    sobolev_norm(f, FractionalExponent::new(0.0).unwrap())
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn vec3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-10.0..10.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transforms_round_trip(seed in any::<u64>(), dim in 2usize..=3) {
        let n = if dim == 2 { 32 } else { 8 };
        let f = field(dim, n, 2, seed);
        let p = to_physical(&f);
        let back = to_physical(&to_spectral(&p));
        prop_assert!(max_abs_diff(&p, &back) <= 1e-12 * (1.0 + l2(&f)));
    }

    #[test]
    fn leray_is_an_idempotent_contraction(seed in any::<u64>(), dim in 2usize..=3) {
        let n = if dim == 2 { 32 } else { 8 };
        let u = field(dim, n, dim, seed);
        let p = leray_project(&u).unwrap();
        let pp = leray_project(&p).unwrap();
        prop_assert!(divergence_ratio(&p).unwrap() <= 1e-13);
        prop_assert!(l2(&p) <= l2(&u) * (1.0 + 1e-14));
        prop_assert!(max_abs_diff(&to_physical(&p), &to_physical(&pp)) <= 1e-13 * (1.0 + l2(&u)));
    }

    #[test]
    fn dealias_is_idempotent(seed in any::<u64>()) {
        let f = field(2, 32, 1, seed);
        let once = dealias(&f);
        prop_assert_eq!(dealias(&once), once);
    }

    #[test]
    fn sobolev_norms_increase_with_order(seed in any::<u64>(), r in 0.0..3.0f64, dr in 0.0..2.0f64) {
        let f = field(2, 32, 3, seed);
        let lo = sobolev_norm(&f, FractionalExponent::new(r).unwrap());
        let hi = sobolev_norm(&f, FractionalExponent::new(r + dr).unwrap());
        prop_assert!(lo <= hi * (1.0 + 1e-14));
    }

    #[test]
    fn heat_semigroup_contracts_and_composes(seed in any::<u64>(), s in 0.0..0.5f64, t in 0.0..0.5f64) {
        let f = field(2, 32, 3, seed);
        let st = semigroup_apply(&f, t, Semigroup::Heat).unwrap();
        let sst = semigroup_apply(&semigroup_apply(&f, s, Semigroup::Heat).unwrap(), t, Semigroup::Heat).unwrap();
        let direct = semigroup_apply(&f, s + t, Semigroup::Heat).unwrap();
        prop_assert!(l2(&st) <= l2(&f) * (1.0 + 1e-14));
        prop_assert!(max_abs_diff(&to_physical(&sst), &to_physical(&direct)) <= 1e-13 * (1.0 + l2(&f)));
    }

    #[test]
    fn convection_is_energy_neutral(seed in any::<u64>()) {
        let v = leray_project(&field(2, 32, 2, seed)).unwrap();
        let b = convective_b(&v, &v).unwrap();
        let (pb, pv) = (to_physical(&b), to_physical(&v));
        let w = v.grid().cell_volume();
        let dot: f64 = pb.data().iter().zip(pv.data()).map(|(x, y)| x * y).sum::<f64>() * w;
        prop_assert!(divergence_ratio(&b).unwrap() <= 1e-12);
        prop_assert!(dot.abs() <= 1e-10 * (1.0 + l2(&v).powi(3)));
    }

    #[test]
    fn noise_coefficient_is_orthogonal_to_director(seed in any::<u64>(), flip in any::<bool>()) {
        let d = field(2, 16, 3, seed);
        let h = field(2, 16, 3, seed.wrapping_add(1));
        let convention = if flip { CrossConvention::HCrossD } else { CrossConvention::DCrossH };
        let g = to_physical(&director_noise_g(&d, &h, convention).unwrap());
        let dp = to_physical(&d);
        for flat in 0..d.grid().len() {
            let (a, b) = (g.vec3(flat), dp.vec3(flat));
            let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            prop_assert!(dot.abs() <= 1e-12 * (1.0 + norm3(a) * norm3(b)));
        }
    }
}

proptest! {
    #[test]
    fn rotation_preserves_norm_and_axis_component(d in vec3(), h in vec3(), eta in -5.0..5.0f64, flip in any::<bool>()) {
        let sign = if flip { -1.0 } else { 1.0 };
        let r = rotate_point(d, h, eta, sign);
        let hn = norm3(h);
        prop_assert!((norm3(r) - norm3(d)).abs() <= 1e-13 * (1.0 + norm3(d)));
        if hn > 1e-8 {
            let along = |v: [f64; 3]| (v[0] * h[0] + v[1] * h[1] + v[2] * h[2]) / hn;
            prop_assert!((along(r) - along(d)).abs() <= 1e-12 * (1.0 + norm3(d)));
        }
    }

    #[test]
    fn rotation_composes_additively(d in vec3(), h in vec3(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let two = rotate_point(rotate_point(d, h, a, 1.0), h, b, 1.0);
        let one = rotate_point(d, h, a + b, 1.0);
        for i in 0..3 {
            prop_assert!((two[i] - one[i]).abs() <= 1e-11 * (1.0 + norm3(d)));
        }
    }

    #[test]
    fn mollifier_is_monotone_in_unit_range(a in -4.0..2.0f64, b in -4.0..2.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(mollifier(lo) <= mollifier(hi));
        prop_assert!((-1.0..=0.0).contains(&mollifier(a)));
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1usize..500, frac in 0.0..=1.0f64) {
        let k = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(k, n, WILSON_Z);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-15 && p <= hi + 1e-15 && hi <= 1.0);
    }

    #[test]
    fn floats_survive_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn crossing_times_are_monotone(norms in prop::collection::vec(0.0..100.0f64, 1..60)) {
        let rows = norms
            .iter()
            .enumerate()
            .map(|(i, &v)| DiagnosticRow {
                step: i,
                t: i as f64 * 0.01,
                v_alpha: v,
                e_alpha: v,
                max_dev: 0.0,
                y_minus: 0.0,
                z_plus: 0.0,
                energy: 0.0,
                divergence: 0.0,
                grad_d_sup: 0.0,
            })
            .collect();
        let record = TrajectoryRecord {
            config_hash: String::new(),
            traj_id: 0,
            amplitude: 1.0,
            alpha: 2.0,
            t_max: 1.0,
            thresholds: vec![10.0, 30.0, 90.0],
            rows,
            tau: vec![None; 3],
            status: Status::Completed,
            failure_step: None,
            snapshots: Vec::new(),
            final_state: None,
        };
        let s = blowup_monitor(&record, &[10.0, 30.0, 90.0]).unwrap();
        let times: Vec<f64> = s.tau.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
        prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn bridge_refinement_preserves_coarse_increments(seed in any::<u64>(), level in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let incs = (0..8)
            .map(|_| {
                let mut inc = NoiseIncrement::zero(3);
                for x in inc.dw.iter_mut() {
                    *x = rand::Rng::random_range(&mut rng, -0.1..0.1);
                }
                inc.d_eta = rand::Rng::random_range(&mut rng, -0.1..0.1);
                inc
            })
            .collect();
        let path = BrownianPath::from_increments(0.01, incs, seed);
        let factor = 1usize << level;
        let fine = brownian_bridge_refine(&path, factor).unwrap();
        prop_assert_eq!(fine.len(), 8 * factor);
        let back = fine.coarsen(factor).unwrap();
        for (a, b) in path.increments.iter().zip(&back.increments) {
            prop_assert!((a.d_eta - b.d_eta).abs() <= 1e-15);
            for (x, y) in a.dw.iter().zip(&b.dw) {
                prop_assert!((x - y).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn config_survives_toml(seed in any::<u64>(), dt_exp in 2i32..6, n_pow in 3u32..7, sigma in 0.0..1.0f64) {
        let mut c = SolverConfig::default();
        c.noise.seed = seed;
        c.noise.sigma = sigma;
        c.scheme.dt = 10f64.powi(-dt_exp);
        c.grid.n = 1 << n_pow;
        let back = nspd::config::parse_config(&c.to_toml()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_increases_with_ell(seed in any::<u64>()) {
        let mut d = field(2, 16, 3, seed).scaled(0.3);
        let grid = *d.grid();
        d.axpy(1.0, &to_spectral(&PhysicalField::from_fn(grid, 3, |_, o| o.copy_from_slice(&[0.0, 0.0, 1.0]))));
        let sweep = psi_sweep(&d, &[1.0, 3.0, 10.0, 100.0, 1e4, 1e6]).unwrap();
        prop_assert!(sweep.windows(2).all(|w| w[1].psi >= w[0].psi));
        prop_assert!(sweep.iter().all(|s| s.psi <= s.y_minus * (1.0 + 1e-14) + 1e-300));
    }
}
