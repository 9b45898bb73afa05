use crate::config::CrossConvention;
use crate::error::{NspdError, Result};
use crate::fields::SystemState;
use crate::nonlinear::{cross, full_drift_f, ModelParams};
use crate::spectral::{
    heat_flow, to_physical, to_spectral, PhysicalField, Semigroup, SpectralField,
};

fn finite_or_fail(f: SpectralField, step: usize) -> Result<SpectralField> {
    if f.is_finite() {
        Ok(f)
    } else {
        Err(NspdError::NumericalFailure { step })
    }
}

/// `v+ = S(dt)[v + dt drift_v + noise]` with the Stokes semigroup.
pub fn step_velocity(
    v: &SpectralField,
    drift_v: &SpectralField,
    noise: Option<&SpectralField>,
    dt: f64,
    step: usize,
) -> Result<SpectralField> {
    if !(dt > 0.0) {
        return Err(NspdError::Domain(format!("time step must be positive, got {dt}")));
    }
    let mut w = v.clone();
    w.axpy(dt, drift_v);
    if let Some(n) = noise {
        w.axpy(1.0, n);
    }
    finite_or_fail(heat_flow(&w, dt, 1.0, Semigroup::Stokes)?, step)
}

/// `d+ = T(gamma dt)[d + dt (gamma |grad d|^2 d - B~(v, d))]`.
pub fn step_director_deterministic(
    y: &SystemState,
    dt: f64,
    params: &ModelParams,
    step: usize,
) -> Result<SpectralField> {
    let (_, drift_d) = full_drift_f(y, None, params)?;
    director_flow(&y.d, &drift_d, dt, params.gamma, step)
}

pub(crate) fn director_flow(
    d: &SpectralField,
    drift_d: &SpectralField,
    dt: f64,
    gamma: f64,
    step: usize,
) -> Result<SpectralField> {
    if !(dt > 0.0) {
        return Err(NspdError::Domain(format!("time step must be positive, got {dt}")));
    }
    let mut w = d.clone();
    w.axpy(dt, drift_d);
    finite_or_fail(heat_flow(&w, dt, gamma, Semigroup::Heat)?, step)
}

/// Exact flow of `d' = s (d x h) eta'` over an increment `d_eta`: the rotation of
/// `d` about `h/|h|` by the angle `-s |h| d_eta`. Points with `h = 0` are fixed.
#[inline]
pub fn rotate_point(d: [f64; 3], h: [f64; 3], d_eta: f64, sign: f64) -> [f64; 3] {
    let hn = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
    if hn == 0.0 || d_eta == 0.0 {
        return d;
    }
    let e = [h[0] / hn, h[1] / hn, h[2] / hn];
    let theta = -sign * hn * d_eta;
    let (s, c) = theta.sin_cos();
    let exd = cross(e, d);
    let edot = e[0] * d[0] + e[1] * d[1] + e[2] * d[2];
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = d[i] * c + exd[i] * s + e[i] * edot * (1.0 - c);
    }
    out
}

/// Euler-Maruyama step `d + s (d x h) d_eta + c/2 ((d x h) x h) dt`, where `c` is
/// the correction sign (`+1` for the consistent scheme).
#[inline]
pub fn ito_point(
    d: [f64; 3],
    h: [f64; 3],
    d_eta: f64,
    dt: f64,
    sign: f64,
    correction_sign: f64,
) -> [f64; 3] {
    let g = cross(d, h);
    let g2 = cross(g, h);
    let mut out = [0.0; 3];
    for i in 0..3 {
        out[i] = d[i] + sign * g[i] * d_eta + correction_sign * 0.5 * g2[i] * dt;
    }
    out
}

/// Pointwise rotation of grid samples, see [`rotate_point`].
pub fn rotate_director(d: &mut PhysicalField, h: &PhysicalField, d_eta: f64, sign: f64) {
    for flat in 0..d.grid().len() {
        let r = rotate_point(d.vec3(flat), h.vec3(flat), d_eta, sign);
        d.set_vec3(flat, r);
    }
}

/// Pointwise Ito increment of grid samples, see [`ito_point`].
pub fn ito_director(
    d: &mut PhysicalField,
    h: &PhysicalField,
    d_eta: f64,
    dt: f64,
    sign: f64,
    correction_sign: f64,
) {
    for flat in 0..d.grid().len() {
        let r = ito_point(d.vec3(flat), h.vec3(flat), d_eta, dt, sign, correction_sign);
        d.set_vec3(flat, r);
    }
}

/// Project grid samples of the director onto the unit sphere; zero vectors are kept.
pub fn renormalize_director(d: &mut PhysicalField) {
    for flat in 0..d.grid().len() {
        let v = d.vec3(flat);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.0 {
            d.set_vec3(flat, [v[0] / n, v[1] / n, v[2] / n]);
        }
    }
}

/// Stratonovich noise step: pointwise rotation of `d` about `h`.
pub fn step_director_noise_rotation(
    d: &SpectralField,
    h: &SpectralField,
    d_eta: f64,
    convention: CrossConvention,
) -> Result<SpectralField> {
    if d.components() != 3 || h.components() != 3 {
        return Err(NspdError::Shape("director and h need 3 components".into()));
    }
    let mut p = to_physical(d);
    rotate_director(&mut p, &to_physical(h), d_eta, convention.sign());
    Ok(to_spectral(&p))
}

/// Ito noise step `d + G(d) d_eta + 1/2 G(G(d)) dt`.
pub fn step_director_noise_ito(
    d: &SpectralField,
    h: &SpectralField,
    d_eta: f64,
    dt: f64,
    convention: CrossConvention,
) -> Result<SpectralField> {
    if d.components() != 3 || h.components() != 3 {
        return Err(NspdError::Shape("director and h need 3 components".into()));
    }
    let mut p = to_physical(d);
    ito_director(&mut p, &to_physical(h), d_eta, dt, convention.sign(), 1.0);
    Ok(to_spectral(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::MagneticFieldSpec;
    use crate::spectral::{random_field, semigroup_apply, Grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rustfft::num_complex::Complex64;
    use std::f64::consts::PI;

    fn norm(a: [f64; 3]) -> f64 {
        (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
    }

    #[test]
    fn velocity_step_examples() {
        let g = Grid::new(2, 16).unwrap();
        let mut v = SpectralField::zeros(g, 2);
        v.set_mode(1, &[1, 0], Complex64::new(0.0, -0.5));
        v.set_mode(1, &[-1, 0], Complex64::new(0.0, 0.5));
        let zero = SpectralField::zeros(g, 2);
        let dt = 0.01;
        let out = step_velocity(&v, &zero, None, dt, 0).unwrap();
        assert!((out.mode(1, &[1, 0]).im + 0.5 * (-dt).exp()).abs() < 1e-16);
        assert_eq!(step_velocity(&zero, &zero, None, dt, 0).unwrap(), zero);
        let mut bad = zero.clone();
        bad.component_mut(0)[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            step_velocity(&v, &bad, None, dt, 7),
            Err(NspdError::NumericalFailure { step: 7 })
        ));
    }

    #[test]
    fn rotation_quarter_turn() {
        let out = rotate_point([1.0, 0.0, 0.0], [0.0, 0.0, 2.0], PI / 4.0, 1.0);
        // oracle: classical RK4 on d' = d x h over the same angle
        let h = [0.0, 0.0, 2.0];
        let mut d = [1.0, 0.0, 0.0];
        let n = 10_000;
        let dt = (PI / 4.0) / n as f64;
        let f = |d: [f64; 3]| cross(d, h);
        for _ in 0..n {
            let k1 = f(d);
            let k2 = f(std::array::from_fn(|i| d[i] + 0.5 * dt * k1[i]));
            let k3 = f(std::array::from_fn(|i| d[i] + 0.5 * dt * k2[i]));
            let k4 = f(std::array::from_fn(|i| d[i] + dt * k3[i]));
            d = std::array::from_fn(|i| d[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        }
        for i in 0..3 {
            assert!((out[i] - d[i]).abs() < 1e-12);
        }
        assert!((out[1] + 1.0).abs() < 1e-15 && out[0].abs() < 1e-15);
        assert_eq!(rotate_point([0.3, 0.4, 0.5], [1.0, 2.0, 3.0], 0.0, 1.0), [0.3, 0.4, 0.5]);
        assert_eq!(rotate_point([0.3, 0.4, 0.5], [0.0; 3], 0.7, 1.0), [0.3, 0.4, 0.5]);
    }

    #[test]
    fn rotation_field_preserves_norms() {
        let g = Grid::new(2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_field(g, 3, 10, 0.0, &mut rng);
        let h = random_field(g, 3, 4, 0.0, &mut rng);
        let out = to_physical(
            &step_director_noise_rotation(&d, &h, 0.37, CrossConvention::DCrossH).unwrap(),
        );
        let dp = to_physical(&d);
        for flat in 0..g.len() {
            let (a, b) = (norm(dp.vec3(flat)), norm(out.vec3(flat)));
            assert!((a - b).abs() <= 1e-14 * a.max(1.0));
        }
    }

    #[test]
    fn ito_step_examples() {
        let d = [1.0, 0.0, 0.0];
        assert_eq!(ito_point(d, [0.0; 3], 0.3, 0.01, 1.0, 1.0), d);
        let dt: f64 = 0.01;
        let up = ito_point(d, [0.0, 0.0, 1.0], dt.sqrt(), dt, 1.0, 1.0);
        let down = ito_point(d, [0.0, 0.0, 1.0], -dt.sqrt(), dt, 1.0, 1.0);
        // two-point average of the Gaussian increment gives the exact one-step mean
        let mean: Vec<f64> = (0..3).map(|i| 0.5 * (up[i] + down[i])).collect();
        assert!((mean[0] - (1.0 - dt / 2.0)).abs() < 1e-15);
        assert!(mean[1].abs() < 1e-15 && mean[2].abs() < 1e-15);
        let g = Grid::new(2, 8).unwrap();
        let df = MagneticFieldSpec::constant(g, [0.2, 0.3, 0.9]).h;
        let zero = MagneticFieldSpec::zero(g).h;
        let out = step_director_noise_ito(&df, &zero, 0.4, 0.1, CrossConvention::DCrossH).unwrap();
        assert!((&out - &df).coeff_norm() < 1e-15);
    }

    #[test]
    fn deterministic_director_reductions() {
        let g = Grid::new(2, 32).unwrap();
        let mut y = SystemState::zeros(g);
        y.d.component_mut(2)[0] = Complex64::new(1.0, 0.0);
        let p = ModelParams::default();
        let out = step_director_deterministic(&y, 1e-2, &p, 0).unwrap();
        assert!((&out - &y.d).coeff_norm() < 1e-16);

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = SystemState::new(0.0, SpectralField::zeros(g, 2), random_field(g, 3, 6, 1.0, &mut rng))
            .unwrap();
        let lin = ModelParams {
            linearized: true,
            ..p
        };
        let out = step_director_deterministic(&y, 0.03, &lin, 0).unwrap();
        assert_eq!(out, semigroup_apply(&y.d, 0.03, Semigroup::Heat).unwrap());
    }

    #[test]
    fn harmonic_map_equilibrium_has_second_order_local_error() {
        let g = Grid::new(2, 32).unwrap();
        let d = to_spectral(&PhysicalField::from_fn(g, 3, |x, o| {
            o[0] = x[0].cos();
            o[1] = x[0].sin();
            o[2] = 0.0;
        }));
        let y = SystemState::new(0.0, SpectralField::zeros(g, 2), d.clone()).unwrap();
        let p = ModelParams::default();
        let dts = [0.04, 0.02, 0.01, 0.005];
        let errs: Vec<f64> = dts
            .iter()
            .map(|dt| (&step_director_deterministic(&y, *dt, &p, 0).unwrap() - &d).l2_norm())
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope >= 1.95, "local error slope {slope} from {errs:?}");
        }
    }
}
