use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::tables;
use crate::error::{NspdError, Result};

/// Sobolev smoothness order `r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalExponent(f64);

impl FractionalExponent {
    pub fn new(r: f64) -> Result<Self> {
        if !r.is_finite() || r < 0.0 {
            return Err(NspdError::Domain(format!(
                "Sobolev exponent must be finite and non-negative, got {r}"
            )));
        }
        Ok(Self(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which analytic semigroup to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semigroup {
    /// `e^{-tA}` with `A = -Pi Delta` on solenoidal mean-zero fields.
    Stokes,
    /// `e^{t Delta}` componentwise.
    Heat,
}

/// Partial derivatives of every component; output component `c * dim + j` is `d_j f_c`.
pub fn gradient(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let dim = g.dim();
    let len = g.len();
    let tab = tables::grid_tables(dim, g.n());
    let mut out = SpectralField::zeros(g, f.components() * dim);
    for c in 0..f.components() {
        let src = f.component(c);
        for j in 0..dim {
            let dst = out.component_mut(c * dim + j);
            for flat in 0..len {
                dst[flat] = src[flat] * Complex64::new(0.0, tab.dk[flat][j]);
            }
        }
    }
    out
}

/// Derivative of one component along one axis.
pub fn partial(f: &SpectralField, component: usize, axis: usize) -> SpectralField {
    let g = *f.grid();
    let mut out = SpectralField::zeros(g, 1);
    let src = f.component(component);
    let dst = out.component_mut(0);
    let tab = tables::grid_tables(g.dim(), g.n());
    for (flat, slot) in dst.iter_mut().enumerate() {
        *slot = src[flat] * Complex64::new(0.0, tab.dk[flat][axis]);
    }
    out
}

/// Componentwise Laplacian, multiplier `-|k|^2`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let g = *f.grid();
    let mut out = f.clone();
    let tab = tables::grid_tables(g.dim(), g.n());
    for c in 0..f.components() {
        for (v, k2) in out.component_mut(c).iter_mut().zip(&tab.ksq) {
            *v *= -k2;
        }
    }
    out
}

/// Spectral divergence of a `dim`-component field.
pub fn divergence(u: &SpectralField) -> Result<SpectralField> {
    let g = *u.grid();
    let dim = g.dim();
    if u.components() != dim {
        return Err(NspdError::Shape(format!(
            "divergence needs {dim} components, got {}",
            u.components()
        )));
    }
    let mut out = SpectralField::zeros(g, 1);
    let dst = out.component_mut(0);
    let tab = tables::grid_tables(dim, g.n());
    for (flat, slot) in dst.iter_mut().enumerate() {
        let k = tab.dk[flat];
        let mut acc = Complex64::default();
        for j in 0..dim {
            acc += u.component(j)[flat] * k[j];
        }
        *slot = acc * Complex64::new(0.0, 1.0);
    }
    Ok(out)
}

/// Largest modal divergence `max_k |k . u_k|` relative to the L^2 norm of `u`.
pub fn divergence_ratio(u: &SpectralField) -> Result<f64> {
    let norm = u.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(divergence(u)?.max_abs_coeff() / norm)
}

/// Helmholtz-Leray projection: `(I - k k^T / |k|^2)` per mode, zero mean.
pub fn leray_project(u: &SpectralField) -> Result<SpectralField> {
    let g = *u.grid();
    let dim = g.dim();
    if u.components() != dim {
        return Err(NspdError::Shape(format!(
            "Leray projection needs {dim} components, got {}",
            u.components()
        )));
    }
    let mut out = u.clone();
    let len = g.len();
    let coeffs = out.coeffs_mut();
    let tab = tables::grid_tables(dim, g.n());
    for flat in 0..len {
        if flat == 0 {
            for j in 0..dim {
                coeffs[j * len] = Complex64::default();
            }
            continue;
        }
        let k = tab.k[flat];
        let mut kdotu = Complex64::default();
        for j in 0..dim {
            kdotu += coeffs[j * len + flat] * k[j];
        }
        let s = kdotu / tab.ksq[flat];
        for j in 0..dim {
            coeffs[j * len + flat] -= s * k[j];
        }
    }
    Ok(out)
}

/// `(sum_k (1 + |k|^2)^r |f_k|^2)` scaled by the torus volume; the square of the H^r norm.
pub(crate) fn hs_norm_sq(f: &SpectralField, r: f64) -> f64 {
    let g = *f.grid();
    let weights = tables::sobolev(g.dim(), g.n(), r);
    let mut s = 0.0;
    for c in 0..f.components() {
        for (w, v) in weights.iter().zip(f.component(c)) {
            s += w * v.norm_sqr();
        }
    }
    g.volume() * s
}

pub(crate) fn hs_norm(f: &SpectralField, r: f64) -> f64 {
    hs_norm_sq(f, r).sqrt()
}

/// Fractional Sobolev norm realized by the Fourier multiplier `(1 + |k|^2)^{r/2}`.
/// For `r = 0` this is the L^2 norm.
pub fn sobolev_norm(f: &SpectralField, r: FractionalExponent) -> f64 {
    hs_norm(f, r.value())
}

/// Apply `S(t)` (Stokes) or `T(t)` (heat): multiplier `e^{-|k|^2 t}`.
/// The Stokes variant is composed with the Leray projection.
pub fn semigroup_apply(f: &SpectralField, t: f64, which: Semigroup) -> Result<SpectralField> {
    heat_flow(f, t, 1.0, which)
}

/// Semigroup with diffusivity `rate`: multiplier `e^{-rate |k|^2 t}`.
pub(crate) fn heat_flow(
    f: &SpectralField,
    t: f64,
    rate: f64,
    which: Semigroup,
) -> Result<SpectralField> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(NspdError::Domain(format!(
            "semigroup time must be finite and non-negative, got {t}"
        )));
    }
    let mut out = match which {
        Semigroup::Stokes => leray_project(f)?,
        Semigroup::Heat => f.clone(),
    };
    if t == 0.0 {
        return Ok(out);
    }
    let g = *f.grid();
    let mult = tables::decay(g.dim(), g.n(), rate * t);
    for c in 0..out.components() {
        for (v, m) in out.component_mut(c).iter_mut().zip(mult.iter()) {
            *v *= *m;
        }
    }
    Ok(out)
}

/// Zero every mode with some `|k_j|` above the dealiasing cutoff. Identity when
/// dealiasing is disabled on the grid.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField) {
    let g = *f.grid();
    let Some(cutoff) = g.dealias_cutoff() else {
        return;
    };
    let mask = tables::retained(g.dim(), g.n(), cutoff);
    for c in 0..f.components() {
        for (v, keep) in f.component_mut(c).iter_mut().zip(mask.iter()) {
            if !keep {
                *v = Complex64::default();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, to_physical, to_spectral, Grid, PhysicalField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn sample(g: Grid, comps: usize, f: impl Fn(&[f64], &mut [f64])) -> SpectralField {
        to_spectral(&PhysicalField::from_fn(g, comps, f))
    }

    fn max_diff(a: &PhysicalField, f: impl Fn(&[f64], usize) -> f64) -> f64 {
        let g = *a.grid();
        let mut worst: f64 = 0.0;
        for c in 0..a.components() {
            for flat in 0..g.len() {
                let x = g.point(flat);
                worst = worst.max((a.component(c)[flat] - f(&x[..g.dim()], c)).abs());
            }
        }
        worst
    }

    #[test]
    fn gradient_of_sine_and_constant() {
        let g = Grid::new(2, 16).unwrap();
        let f = sample(g, 1, |x, o| o[0] = x[0].sin());
        let grad = to_physical(&gradient(&f));
        let err = max_diff(&grad, |x, c| if c == 0 { x[0].cos() } else { 0.0 });
        assert!(err < 1e-13);
        let k = sample(g, 1, |_, o| o[0] = 3.0);
        assert!(gradient(&k).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn gradient_of_plane_wave_multiplies_by_ik() {
        let g = Grid::new(3, 8).unwrap();
        let mut f = SpectralField::zeros(g, 1);
        f.set_mode(0, &[1, -2, 3], Complex64::new(0.3, 0.7));
        let grad = gradient(&f);
        let a = Complex64::new(0.3, 0.7);
        for (j, kj) in [1.0, -2.0, 3.0].iter().enumerate() {
            let got = grad.mode(j, &[1, -2, 3]);
            assert!((got - a * Complex64::new(0.0, *kj)).norm() < 1e-15);
        }
    }

    #[test]
    fn laplacian_examples() {
        let g = Grid::new(2, 16).unwrap();
        let f = sample(g, 1, |x, o| o[0] = x[0].sin());
        let lap = to_physical(&laplacian(&f));
        assert!(max_diff(&lap, |x, _| -x[0].sin()) < 1e-13);
        let f2 = sample(g, 1, |x, o| o[0] = x[0].sin() * x[1].cos());
        let lap2 = to_physical(&laplacian(&f2));
        assert!(max_diff(&lap2, |x, _| -2.0 * x[0].sin() * x[1].cos()) < 1e-13);
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_taylor_green() {
        let g = Grid::new(2, 32).unwrap();
        let phi = sample(g, 1, |x, o| o[0] = (2.0 * x[0]).sin() * x[1].cos() + x[1].sin());
        let grad = gradient(&phi);
        assert!(leray_project(&grad).unwrap().coeff_norm() < 1e-14);
        let tg = sample(g, 2, |x, o| {
            o[0] = x[0].sin() * x[1].cos();
            o[1] = -x[0].cos() * x[1].sin();
        });
        assert!((&leray_project(&tg).unwrap() - &tg).coeff_norm() < 1e-14);
    }

    #[test]
    fn leray_single_mode_matches_formula_and_numerical_divergence() {
        let g = Grid::new(3, 16).unwrap();
        let k = [2i64, -1, 3];
        let a = [
            Complex64::new(0.4, -0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.9, 0.3),
        ];
        let mut u = SpectralField::zeros(g, 3);
        for j in 0..3 {
            u.set_mode(j, &k, a[j]);
            u.set_mode(j, &[-k[0], -k[1], -k[2]], a[j].conj());
        }
        let p = leray_project(&u).unwrap();
        let k2 = 14.0;
        let adotk: Complex64 = (0..3).map(|j| a[j] * k[j] as f64).sum();
        for j in 0..3 {
            let expect = a[j] - adotk * k[j] as f64 / k2;
            assert!((p.mode(j, &k) - expect).norm() < 1e-15);
        }
        // independent check: central differences of the analytic plane wave
        let phys = to_physical(&p);
        let amp: Vec<Complex64> = (0..3).map(|j| p.mode(j, &k)).collect();
        let eval = |x: &[f64], j: usize| {
            let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
            2.0 * (amp[j] * Complex64::new(phase.cos(), phase.sin())).re
        };
        assert!(max_diff(&phys, |x, j| eval(x, j)) < 1e-13);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for flat in (0..g.len()).step_by(97) {
            let x = g.point(flat);
            let mut div = 0.0;
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                div += (eval(&xp, j) - eval(&xm, j)) / (2.0 * h);
            }
            worst = worst.max(div.abs());
        }
        assert!(worst < 1e-8, "finite-difference divergence {worst}");
        assert!(divergence(&p).unwrap().max_abs_coeff() <= 1e-12 * p.l2_norm());
    }

    #[test]
    fn sobolev_norm_of_sine() {
        let g = Grid::new(2, 16).unwrap();
        let f = sample(g, 1, |x, o| o[0] = x[0].sin());
        let l2 = PI * 2f64.sqrt();
        assert!((sobolev_norm(&f, FractionalExponent::new(0.0).unwrap()) - l2).abs() < 1e-13);
        for r in [0.5, 1.0, 2.7] {
            let got = sobolev_norm(&f, FractionalExponent::new(r).unwrap());
            assert!((got - 2f64.powf(r / 2.0) * l2).abs() < 1e-12 * got);
        }
        assert_eq!(sobolev_norm(&SpectralField::zeros(g, 3), FractionalExponent::new(1.0).unwrap()), 0.0);
        assert!(FractionalExponent::new(-0.1).is_err());
        assert!(FractionalExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn semigroup_examples() {
        let g = Grid::new(2, 16).unwrap();
        let f = sample(g, 1, |x, o| o[0] = x[1].cos());
        assert_eq!(semigroup_apply(&f, 0.0, Semigroup::Heat).unwrap(), f);
        let s = semigroup_apply(&f, 1.0, Semigroup::Heat).unwrap();
        assert!((s.mode(0, &[0, 1]).re - 0.5 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(
            semigroup_apply(&f, -1e-3, Semigroup::Heat),
            Err(NspdError::Domain(_))
        ));
    }

    #[test]
    fn dealias_is_idempotent_and_counts_modes() {
        let g = Grid::new(2, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = random_field(g, 1, 32, 0.0, &mut rng);
        let d = dealias(&noise);
        let survivors = d.coeffs().iter().filter(|c| c.norm() > 0.0).count();
        assert_eq!(survivors, g.retained_mode_count());
        assert_eq!(dealias(&d), d);
    }

    #[test]
    fn padded_product_matches_double_resolution() {
        // sin(m x) * sin(m x) with m = n/2 - 1, evaluated with padding, versus the same
        // product on a grid twice as fine restricted to the coarse modes
        let n = 32;
        let m = (n / 2 - 1) as f64;
        let g = Grid::new(2, n).unwrap();
        let f = sample(g, 1, |x, o| o[0] = (m * x[0]).sin());
        let prod = crate::spectral::products::multiply(&f, &f);

        let fine = Grid::new(2, 2 * n).unwrap();
        let pf = PhysicalField::from_fn(fine, 1, |x, o| o[0] = (m * x[0]).sin().powi(2));
        let oracle_fine = to_spectral(&pf);
        let mut oracle = SpectralField::zeros(g, 1);
        for flat in 0..g.len() {
            if g.is_nyquist(flat) || !g.is_retained(flat) {
                continue;
            }
            let k = g.mode(flat);
            oracle.component_mut(0)[flat] = oracle_fine.mode(0, &k);
        }
        assert!((&prod - &oracle).coeff_norm() < 1e-10);
        assert!((prod.mode(0, &[0, 0]).re - 0.5).abs() < 1e-12);
    }
}
