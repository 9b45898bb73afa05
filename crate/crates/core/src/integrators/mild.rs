use crate::error::{NspdError, Result};
use crate::fields::{product_norm, PathNorm, SpaceLevel, SpaceTag, SystemState};
use crate::noise::BrownianPath;
use crate::spectral::{heat_flow, Semigroup, SpectralField};

use super::model::Model;

/// Residual growth beyond this multiple of the first residual signals divergence.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

fn check_samples(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(NspdError::Domain(format!("{what} path is empty")));
    }
    Ok(())
}

/// `u(t_n) = sum_{j<n} S(t_n - t_j) f(t_j) dt` for `n = 0..=f.len()`, with `S` the
/// semigroup of `which` at `rate`. Left-endpoint rule with exact multipliers.
pub fn convolution_s_star(
    f: &[SpectralField],
    dt: f64,
    rate: f64,
    which: Semigroup,
) -> Result<Vec<SpectralField>> {
    check_samples(f.len(), "integrand")?;
    let mut out = Vec::with_capacity(f.len() + 1);
    let mut u = SpectralField::zeros(*f[0].grid(), f[0].components());
    out.push(u.clone());
    for fj in f {
        u.check_same_shape(fj)?;
        u.axpy(dt, fj);
        u = heat_flow(&u, dt, rate, which)?;
        out.push(u.clone());
    }
    Ok(out)
}

/// `u(t_n) = sum_{j<n} S(t_n - t_j) sum_k xi_k(t_j) dW_{j,k}` for `n = 0..=xi.len()`.
///
/// `xi[j]` holds one coefficient field per noise mode; `increments[j]` the matching increments.
pub fn convolution_s_diamond(
    xi: &[Vec<SpectralField>],
    increments: &[Vec<f64>],
    dt: f64,
    rate: f64,
    which: Semigroup,
) -> Result<Vec<SpectralField>> {
    check_samples(xi.len(), "noise coefficient")?;
    if xi.len() != increments.len() {
        return Err(NspdError::Domain(format!(
            "{} coefficient samples but {} increments",
            xi.len(),
            increments.len()
        )));
    }
    let first = xi[0]
        .first()
        .ok_or_else(|| NspdError::Domain("noise coefficient sample has no modes".into()))?;
    let mut u = SpectralField::zeros(*first.grid(), first.components());
    let mut out = Vec::with_capacity(xi.len() + 1);
    out.push(u.clone());
    for (j, (fields, dw)) in xi.iter().zip(increments).enumerate() {
        if fields.len() != dw.len() {
            return Err(NspdError::Domain(format!(
                "step {j}: {} coefficient fields but {} increments",
                fields.len(),
                dw.len()
            )));
        }
        for (f, w) in fields.iter().zip(dw) {
            u.check_same_shape(f)?;
            u.axpy(*w, f);
        }
        u = heat_flow(&u, dt, rate, which)?;
        out.push(u.clone());
    }
    Ok(out)
}

/// A state path sampled at `t_n = n dt`, `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MildPath {
    pub dt: f64,
    pub states: Vec<SystemState>,
}

impl MildPath {
    pub fn horizon(&self) -> f64 {
        self.dt * (self.states.len().saturating_sub(1)) as f64
    }

    /// The two pieces of the squared `X_T` norm at regularity `alpha`.
    pub fn norm_parts(&self, alpha: f64) -> Result<PathNorm> {
        check_samples(self.states.len(), "state")?;
        let times: Vec<f64> = (0..self.states.len()).map(|n| n as f64 * self.dt).collect();
        let v = self
            .states
            .iter()
            .map(|y| product_norm(y, SpaceTag::new(SpaceLevel::V, alpha)))
            .collect::<Result<Vec<_>>>()?;
        let e = self
            .states
            .iter()
            .map(|y| product_norm(y, SpaceTag::new(SpaceLevel::E, alpha)))
            .collect::<Result<Vec<_>>>()?;
        PathNorm::from_samples(&times, &v, &e, self.horizon())
    }

    /// `|u|_{X_T} = (sup ||u||^2_V + int ||u||^2_E)^{1/2}`.
    pub fn norm(&self, alpha: f64) -> Result<f64> {
        Ok(self.norm_parts(alpha)?.total().sqrt())
    }

    /// `|self - other|_{X_T}`.
    pub fn distance(&self, other: &MildPath, alpha: f64) -> Result<f64> {
        if self.states.len() != other.states.len() || self.dt != other.dt {
            return Err(NspdError::Shape(format!(
                "paths differ: {} samples at dt {} vs {} at dt {}",
                self.states.len(),
                self.dt,
                other.states.len(),
                other.dt
            )));
        }
        let diff = MildPath {
            dt: self.dt,
            states: self
                .states
                .iter()
                .zip(&other.states)
                .map(|(a, b)| a.combine(1.0, b, -1.0))
                .collect(),
        };
        diff.norm(alpha)
    }

    pub fn last(&self) -> &SystemState {
        self.states.last().expect("mild path is never empty")
    }
}

/// `t -> S(t) y0` on the grid of `path`.
pub fn free_evolution(model: &Model, y0: &SystemState, path: &BrownianPath) -> Result<MildPath> {
    let mut states = Vec::with_capacity(path.len() + 1);
    let mut y = y0.clone();
    y.time = 0.0;
    states.push(y.clone());
    for _ in 0..path.len() {
        y = model.semigroup(&y, path.dt)?;
        states.push(y.clone());
    }
    Ok(MildPath { dt: path.dt, states })
}

/// The mild map `Phi(u) = S y0 + S*(F(u)) + S<>(G(u))` on the grid of `path`, where `F`
/// is the Ito drift and the stochastic sum uses left endpoints.
pub fn mild_map(model: &Model, y0: &SystemState, path: &BrownianPath, u: &MildPath) -> Result<MildPath> {
    if u.states.len() != path.len() + 1 {
        return Err(NspdError::Domain(format!(
            "iterate has {} samples, path needs {}",
            u.states.len(),
            path.len() + 1
        )));
    }
    let dt = path.dt;
    let mut states = Vec::with_capacity(path.len() + 1);
    let mut w = y0.clone();
    w.time = 0.0;
    states.push(w.clone());
    for (um, inc) in u.states.iter().zip(&path.increments) {
        let drift = model.drift(um, true)?;
        let noise = model.noise_term(um, inc)?;
        let g = drift.combine(dt, &noise, 1.0);
        w = model.semigroup(&w.combine(1.0, &g, 1.0), dt)?;
        if !w.is_finite() {
            return Err(NspdError::NumericalFailure { step: states.len() });
        }
        states.push(w.clone());
    }
    Ok(MildPath { dt, states })
}

/// Result of a Picard run.
#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// `r_m = |u^{m+1} - u^m|_{X_T}` for `m = 0..n_iters`.
    pub residuals: Vec<f64>,
    /// All iterates `u^0..=u^{n_iters}` when requested, otherwise empty.
    pub iterates: Vec<MildPath>,
    /// The last iterate.
    pub fixed_point: MildPath,
}

impl PicardOutcome {
    /// `r_{m+1} / r_m`; zero residuals give ratio 0.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals
            .windows(2)
            .map(|r| if r[0] == 0.0 { 0.0 } else { r[1] / r[0] })
            .collect()
    }
}

/// Picard iteration `u^{m+1} = Phi(u^m)` from `u^0 = S(.) y0` on a fixed noise path.
///
/// Fails with [`NspdError::Divergence`] once a residual exceeds
/// [`DIVERGENCE_FACTOR`] times the first.
pub fn picard_iterate_mild(
    model: &Model,
    y0: &SystemState,
    path: &BrownianPath,
    n_iters: usize,
    keep_iterates: bool,
) -> Result<PicardOutcome> {
    check_samples(path.len(), "noise")?;
    let mut u = free_evolution(model, y0, path)?;
    let mut iterates = Vec::new();
    let mut residuals = Vec::with_capacity(n_iters);
    for m in 0..n_iters {
        let next = match mild_map(model, y0, path, &u) {
            Ok(p) => p,
            Err(NspdError::NumericalFailure { .. }) => {
                return Err(NspdError::Divergence {
                    iterate: m + 1,
                    residual: f64::INFINITY,
                    limit: DIVERGENCE_FACTOR * residuals.first().copied().unwrap_or(0.0),
                })
            }
            Err(e) => return Err(e),
        };
        let r = next.distance(&u, model.alpha)?;
        let limit = DIVERGENCE_FACTOR * residuals.first().copied().unwrap_or(r);
        if !r.is_finite() || r > limit {
            return Err(NspdError::Divergence {
                iterate: m + 1,
                residual: r,
                limit,
            });
        }
        residuals.push(r);
        if keep_iterates {
            iterates.push(std::mem::replace(&mut u, next));
        } else {
            u = next;
        }
    }
    if keep_iterates {
        iterates.push(u.clone());
    }
    Ok(PicardOutcome {
        residuals,
        iterates,
        fixed_point: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SolverConfig;
    use crate::fields::make_initial_state;
    use crate::spectral::Grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use rustfft::num_complex::Complex64;

    fn mode_field(g: Grid, k: &[i64], a: f64) -> SpectralField {
        let mut f = SpectralField::zeros(g, 1);
        let neg: Vec<i64> = k.iter().map(|x| -x).collect();
        f.set_mode(0, k, Complex64::new(a / 2.0, 0.0));
        f.set_mode(0, &neg, Complex64::new(a / 2.0, 0.0));
        f
    }

    #[test]
    fn star_of_zero_is_zero_and_empty_is_error() {
        let g = Grid::new(2, 8).unwrap();
        let f = vec![SpectralField::zeros(g, 2); 5];
        let u = convolution_s_star(&f, 0.1, 1.0, Semigroup::Heat).unwrap();
        assert_eq!(u.len(), 6);
        assert!(u.iter().all(|x| x.max_abs_coeff() == 0.0));
        assert!(convolution_s_star(&[], 0.1, 1.0, Semigroup::Heat).is_err());
    }

    #[test]
    fn star_converges_at_first_order_to_closed_form() {
        let g = Grid::new(2, 8).unwrap();
        let k2: f64 = 5.0;
        let t = 0.5;
        let exact = (1.0 - (-k2 * t).exp()) / k2;
        let mut errs = Vec::new();
        for n in [20usize, 40, 80, 160] {
            let f = vec![mode_field(g, &[1, 2], 2.0); n];
            let u = convolution_s_star(&f, t / n as f64, 1.0, Semigroup::Heat).unwrap();
            errs.push((u[n].mode(0, &[1, 2]).re - exact).abs());
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope > 0.95 && slope < 1.05, "slope {slope}");
        }
    }

    #[test]
    fn diamond_alignment_and_zero_increments() {
        let g = Grid::new(2, 8).unwrap();
        let xi = vec![vec![mode_field(g, &[1, 0], 1.0)]; 4];
        assert!(convolution_s_diamond(&xi, &vec![vec![0.0]; 3], 0.1, 1.0, Semigroup::Heat).is_err());
        let u = convolution_s_diamond(&xi, &vec![vec![0.0]; 4], 0.1, 1.0, Semigroup::Heat).unwrap();
        assert!(u.iter().all(|x| x.max_abs_coeff() == 0.0));
    }

    #[test]
    fn diamond_variance_matches_ito_isometry() {
        let g = Grid::new(2, 8).unwrap();
        let k = [1i64, 1];
        let k2 = 2.0;
        let xi = 0.7;
        let (t, n) = (0.5, 50usize);
        let dt = t / n as f64;
        let coeff = vec![vec![mode_field(g, &k, xi)]; n];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let paths = 1000;
        let mut samples = Vec::with_capacity(paths);
        for _ in 0..paths {
            let inc: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    vec![dt.sqrt() * z]
                })
                .collect();
            let u = convolution_s_diamond(&coeff, &inc, dt, 1.0, Semigroup::Heat).unwrap();
            samples.push(2.0 * u[n].mode(0, &k).re);
        }
        // discrete isometry: sum_j xi^2 e^{-2 k2 (t - t_j)} dt
        let discrete: f64 = (0..n)
            .map(|j| xi * xi * (-2.0 * k2 * (t - j as f64 * dt)).exp() * dt)
            .sum();
        let limit = xi * xi * (1.0 - (-2.0 * k2 * t).exp()) / (2.0 * k2);
        assert!((discrete - limit).abs() < 0.1 * limit);
        let var = samples.iter().map(|x| x * x).sum::<f64>() / paths as f64;
        let se = (samples.iter().map(|x| (x * x - var).powi(2)).sum::<f64>() / paths as f64).sqrt()
            / (paths as f64).sqrt();
        assert!((var - discrete).abs() < 3.0 * se, "var {var} vs {discrete} (se {se})");
    }

    fn small_config() -> SolverConfig {
        let mut c = SolverConfig::default();
        c.grid.n = 16;
        c.scheme.dt = 5e-3;
        c.scheme.t_max = 0.05;
        c.initial.taylor_green_amplitude = 0.1;
        c.initial.director_perturbation = 0.05;
        c
    }

    #[test]
    fn zero_data_zero_noise_gives_zero_residuals() {
        let mut c = small_config();
        c.noise.sigma = 0.0;
        c.magnetic.amplitudes = vec![[0.0; 3]];
        let m = Model::from_config(&c).unwrap();
        let path = BrownianPath::from_increments(
            c.scheme.dt,
            vec![crate::noise::NoiseIncrement::zero(m.n_modes()); 10],
            0,
        );
        let out = picard_iterate_mild(&m, &SystemState::zeros(m.grid), &path, 3, true).unwrap();
        assert_eq!(out.residuals, vec![0.0; 3]);
        assert_eq!(out.iterates.len(), 4);
    }

    #[test]
    fn noisy_fixed_point_satisfies_mild_identity() {
        let c = small_config();
        let m = Model::from_config(&c).unwrap();
        let path = BrownianPath::sample(&c.noise, 0, 10, c.scheme.dt).unwrap();
        let y0 = make_initial_state(&c).unwrap();
        let out = picard_iterate_mild(&m, &y0, &path, 12, false).unwrap();
        let r = &out.residuals;
        assert!(r[4] / r[0] <= 1e-2, "{r:?}");
        let phi = mild_map(&m, &y0, &path, &out.fixed_point).unwrap();
        assert!(phi.distance(&out.fixed_point, m.alpha).unwrap() <= 1e-8);
    }
}
