//! Truncated cylindrical Wiener process driving the velocity, the scalar
//! Brownian motion driving the director, and the velocity noise coefficient `Q`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::config::NoiseConfig;
use crate::error::{NspdError, Result, Violation};
use crate::spectral::{hs_norm, Grid, SpectralField};

const TAG_INCREMENT: u64 = 0;
const TAG_BRIDGE: u64 = 1 << 32;

/// One step's Gaussian increments: `dw[k] ~ N(0, dt)` per basis field and `d_eta ~ N(0, dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub dw: Vec<f64>,
    pub d_eta: f64,
}

impl NoiseIncrement {
    pub fn zero(n_modes: usize) -> Self {
        Self {
            dw: vec![0.0; n_modes],
            d_eta: 0.0,
        }
    }
}

/// Independent stream for `(seed, trajectory, step, tag)`.
fn stream(seed: u64, traj_id: u64, step: u64, tag: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&traj_id.to_le_bytes());
    key[16..24].copy_from_slice(&step.to_le_bytes());
    key[24..].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Increments of step `step` of trajectory `traj_id`; a pure function of its arguments.
pub fn sample_increment(
    config: &NoiseConfig,
    traj_id: u64,
    step: u64,
    dt: f64,
) -> Result<NoiseIncrement> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(NspdError::Domain(format!("time step must be positive, got {dt}")));
    }
    let mut rng = stream(config.seed, traj_id, step, TAG_INCREMENT);
    let s = dt.sqrt();
    let dw = (0..config.n_modes)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s * z
        })
        .collect();
    let z: f64 = StandardNormal.sample(&mut rng);
    Ok(NoiseIncrement { dw, d_eta: s * z })
}

/// A realized Brownian path stored as increments on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    pub dt: f64,
    pub increments: Vec<NoiseIncrement>,
    seed: u64,
    traj_id: u64,
    /// Number of halvings applied since sampling; keys the bridge streams.
    level: u32,
}

impl BrownianPath {
    /// `n_steps` increments of size `dt` from the counter-based streams.
    pub fn sample(config: &NoiseConfig, traj_id: u64, n_steps: usize, dt: f64) -> Result<Self> {
        let increments = (0..n_steps as u64)
            .map(|j| sample_increment(config, traj_id, j, dt))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dt,
            increments,
            seed: config.seed,
            traj_id,
            level: 0,
        })
    }

    /// Build a path from explicit increments; `seed` keys later refinements.
    pub fn from_increments(dt: f64, increments: Vec<NoiseIncrement>, seed: u64) -> Self {
        Self {
            dt,
            increments,
            seed,
            traj_id: 0,
            level: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.len() as f64
    }

    /// Sum of consecutive groups of `factor` increments: the path at step `dt * factor`.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.len().is_multiple_of(factor) {
            return Err(NspdError::Domain(format!(
                "cannot group {} increments by {factor}",
                self.len()
            )));
        }
        let increments = self
            .increments
            .chunks(factor)
            .map(|c| {
                let mut acc = NoiseIncrement::zero(c[0].dw.len());
                for inc in c {
                    for (a, x) in acc.dw.iter_mut().zip(&inc.dw) {
                        *a += x;
                    }
                    acc.d_eta += inc.d_eta;
                }
                acc
            })
            .collect();
        Ok(Self {
            dt: self.dt * factor as f64,
            increments,
            seed: self.seed,
            traj_id: self.traj_id,
            level: self.level,
        })
    }
}

fn bridge_split(x: f64, half_sd: f64, z: f64) -> (f64, f64) {
    let a = 0.5 * x + half_sd * z;
    (a, x - a)
}

/// Refine a path by `factor` (a power of two) with Brownian bridges: each
/// increment `dW` over `h` splits into `a = dW/2 + (sqrt(h)/2) Z` and `dW - a`.
/// Refining by 4 equals refining by 2 twice.
pub fn brownian_bridge_refine(path: &BrownianPath, factor: usize) -> Result<BrownianPath> {
    if factor == 0 || !factor.is_power_of_two() {
        return Err(NspdError::Domain(format!(
            "refinement factor must be a power of two, got {factor}"
        )));
    }
    let mut cur = path.clone();
    let mut f = factor;
    while f > 1 {
        let h = cur.dt;
        let half_sd = 0.5 * h.sqrt();
        let tag = TAG_BRIDGE + cur.level as u64;
        let mut next = Vec::with_capacity(2 * cur.len());
        for (j, inc) in cur.increments.iter().enumerate() {
            let mut rng = stream(cur.seed, cur.traj_id, j as u64, tag);
            let mut first = NoiseIncrement::zero(inc.dw.len());
            let mut second = NoiseIncrement::zero(inc.dw.len());
            for (k, x) in inc.dw.iter().enumerate() {
                let z: f64 = StandardNormal.sample(&mut rng);
                let (a, b) = bridge_split(*x, half_sd, z);
                first.dw[k] = a;
                second.dw[k] = b;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            let (a, b) = bridge_split(inc.d_eta, half_sd, z);
            first.d_eta = a;
            second.d_eta = b;
            next.push(first);
            next.push(second);
        }
        cur = BrownianPath {
            dt: h / 2.0,
            increments: next,
            seed: cur.seed,
            traj_id: cur.traj_id,
            level: cur.level + 1,
        };
        f /= 2;
    }
    Ok(cur)
}

/// Source of per-step increments for an integrator.
pub trait NoiseSource {
    fn n_modes(&self) -> usize;
    fn increment(&self, step: usize, dt: f64) -> Result<NoiseIncrement>;
}

/// Fresh increments from the counter-based streams of one trajectory.
#[derive(Debug, Clone)]
pub struct CounterNoise {
    pub config: NoiseConfig,
    pub traj_id: u64,
}

impl NoiseSource for CounterNoise {
    fn n_modes(&self) -> usize {
        self.config.n_modes
    }

    fn increment(&self, step: usize, dt: f64) -> Result<NoiseIncrement> {
        sample_increment(&self.config, self.traj_id, step as u64, dt)
    }
}

/// Replays a stored path; the requested step must match the path's `dt`.
impl NoiseSource for BrownianPath {
    fn n_modes(&self) -> usize {
        self.increments.first().map_or(0, |i| i.dw.len())
    }

    fn increment(&self, step: usize, dt: f64) -> Result<NoiseIncrement> {
        if (dt - self.dt).abs() > 1e-12 * self.dt {
            return Err(NspdError::Domain(format!(
                "path has step {}, integrator requested {dt}",
                self.dt
            )));
        }
        self.increments.get(step).cloned().ok_or_else(|| {
            NspdError::Domain(format!("path has {} increments, step {step} requested", self.len()))
        })
    }
}

/// All increments zero.
#[derive(Debug, Clone, Copy)]
pub struct ZeroNoise {
    pub n_modes: usize,
}

impl NoiseSource for ZeroNoise {
    fn n_modes(&self) -> usize {
        self.n_modes
    }

    fn increment(&self, _step: usize, _dt: f64) -> Result<NoiseIncrement> {
        Ok(NoiseIncrement::zero(self.n_modes))
    }
}

/// One real divergence-free basis field `c e cos(k.x)` or `c e sin(k.x)`, `e . k = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisField {
    pub k: [i64; 3],
    pub polarization: [f64; 3],
    cosine: bool,
}

impl BasisField {
    pub fn k_squared(&self) -> f64 {
        self.k.iter().map(|x| (x * x) as f64).sum()
    }

    pub fn is_cosine(&self) -> bool {
        self.cosine
    }
}

fn polarizations(k: [i64; 3], dim: usize) -> Vec<[f64; 3]> {
    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let norm = |a: [f64; 3]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let unit = |a: [f64; 3]| {
        let n = norm(a);
        [a[0] / n, a[1] / n, a[2] / n]
    };
    if dim == 2 {
        return vec![unit([-kf[1], kf[0], 0.0])];
    }
    let axis = (0..3)
        .min_by(|&a, &b| kf[a].abs().partial_cmp(&kf[b].abs()).expect("finite"))
        .expect("three axes");
    let mut a = [0.0; 3];
    a[axis] = 1.0;
    let e1 = unit(crate::nonlinear::cross(kf, a));
    let e2 = unit(crate::nonlinear::cross(kf, e1));
    vec![e1, e2]
}

/// Retained wavevectors in the half space (first nonzero entry positive), ordered
/// by `|k|^2` and then lexicographically.
fn half_space_modes(grid: &Grid) -> Vec<[i64; 3]> {
    let mut ks: Vec<[i64; 3]> = (0..grid.len())
        .filter(|&f| !grid.is_nyquist(f) && grid.is_retained(f) && f != 0)
        .map(|f| grid.mode(f))
        .filter(|k| k.iter().find(|x| **x != 0).is_some_and(|x| *x > 0))
        .collect();
    ks.sort_by(|a, b| {
        let na: i64 = a.iter().map(|x| x * x).sum();
        let nb: i64 = b.iter().map(|x| x * x).sum();
        na.cmp(&nb).then(a.cmp(b))
    });
    ks
}

/// Number of basis fields available on `grid`.
pub fn available_modes(grid: &Grid) -> usize {
    2 * (grid.dim() - 1) * half_space_modes(grid).len()
}

/// First `n` basis fields: for each wavevector in order, cosine then sine, each
/// over the polarizations.
pub fn basis(grid: &Grid, n: usize) -> Vec<BasisField> {
    let mut out = Vec::with_capacity(n);
    'outer: for k in half_space_modes(grid) {
        for cosine in [true, false] {
            for e in polarizations(k, grid.dim()) {
                if out.len() == n {
                    break 'outer;
                }
                out.push(BasisField {
                    k,
                    polarization: e,
                    cosine,
                });
            }
        }
    }
    out
}

fn add_basis_field(out: &mut SpectralField, b: &BasisField, weight: f64) {
    let g = *out.grid();
    let c = (2.0 / g.volume()).sqrt() * weight;
    let pos = g.flat_of_mode(&b.k);
    let neg = g.flat_of_mode(&[-b.k[0], -b.k[1], -b.k[2]]);
    let (cp, cn) = if b.cosine {
        (Complex64::new(0.5 * c, 0.0), Complex64::new(0.5 * c, 0.0))
    } else {
        (Complex64::new(0.0, -0.5 * c), Complex64::new(0.0, 0.5 * c))
    };
    for j in 0..g.dim() {
        let e = b.polarization[j];
        if e == 0.0 {
            continue;
        }
        let comp = out.component_mut(j);
        comp[pos] += cp * e;
        comp[neg] += cn * e;
    }
}

/// Velocity noise coefficient `Q(v) e = (1 + g rho(v)) sum_k q_k e_k psi_k` with
/// `q_k = sigma (1 + |k|^2)^{-s/2}` and `rho(v) = ||v||_{H^alpha} / (1 + ||v||_{H^alpha})`.
#[derive(Debug, Clone)]
pub struct VelocityNoise {
    grid: Grid,
    basis: Vec<BasisField>,
    q: Vec<f64>,
    gain: f64,
    alpha: f64,
}

impl VelocityNoise {
    pub fn new(grid: Grid, config: &NoiseConfig, alpha: f64) -> Result<Self> {
        let dimf = grid.dim() as f64;
        let mut v = Vec::new();
        if !(config.decay_s > alpha + dimf / 2.0) {
            v.push(Violation {
                field: "noise.decay_s".into(),
                constraint: format!("decay_s must exceed alpha + dim/2 = {}", alpha + dimf / 2.0),
                value: config.decay_s.to_string(),
            });
        }
        let available = available_modes(&grid);
        if config.n_modes > available {
            v.push(Violation {
                field: "noise.n_modes".into(),
                constraint: format!("must not exceed the {available} retained basis fields"),
                value: config.n_modes.to_string(),
            });
        }
        if !v.is_empty() {
            return Err(NspdError::Validation(v));
        }
        let basis = basis(&grid, config.n_modes);
        let q = basis
            .iter()
            .map(|b| config.sigma * (1.0 + b.k_squared()).powf(-config.decay_s / 2.0))
            .collect();
        Ok(Self {
            grid,
            basis,
            q,
            gain: config.multiplicative_gain,
            alpha,
        })
    }

    pub fn basis(&self) -> &[BasisField] {
        &self.basis
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn n_modes(&self) -> usize {
        self.basis.len()
    }

    /// Basis field `psi_i` as a spectral field with unit L^2 norm.
    pub fn basis_field(&self, i: usize) -> SpectralField {
        let mut out = SpectralField::zeros(self.grid, self.grid.dim());
        add_basis_field(&mut out, &self.basis[i], 1.0);
        out
    }

    /// `rho(v)`, a 1-Lipschitz saturating functional of `||v||_{H^alpha}` with values in `[0, 1)`.
    pub fn rho(&self, v: &SpectralField) -> f64 {
        let n = hs_norm(v, self.alpha);
        n / (1.0 + n)
    }

    /// `Q(v) dw`.
    pub fn apply(&self, v: &SpectralField, dw: &[f64]) -> Result<SpectralField> {
        if dw.len() != self.basis.len() {
            return Err(NspdError::Shape(format!(
                "expected {} noise increments, got {}",
                self.basis.len(),
                dw.len()
            )));
        }
        let factor = if self.gain == 0.0 {
            1.0
        } else {
            1.0 + self.gain * self.rho(v)
        };
        let mut out = SpectralField::zeros(self.grid, self.grid.dim());
        for ((b, q), w) in self.basis.iter().zip(&self.q).zip(dw) {
            if *q == 0.0 || *w == 0.0 {
                continue;
            }
            add_basis_field(&mut out, b, factor * q * w);
        }
        Ok(out)
    }

    /// Squared Hilbert-Schmidt norm of `Q(v)` into `H^alpha`.
    pub fn hs_norm_sq(&self, v: &SpectralField) -> f64 {
        let f = 1.0 + self.gain * self.rho(v);
        self.basis
            .iter()
            .zip(&self.q)
            .map(|(b, q)| f * f * q * q * (1.0 + b.k_squared()).powf(self.alpha))
            .sum()
    }

    /// `l_0 = (1 + g)^2 sum_k q_k^2 (1 + |k|^2)^alpha`, so that `||Q(v)||^2_HS <= l_0 (1 + ||v||^2)`.
    pub fn growth_constant(&self) -> f64 {
        let f = 1.0 + self.gain;
        self.basis
            .iter()
            .zip(&self.q)
            .map(|(b, q)| f * f * q * q * (1.0 + b.k_squared()).powf(self.alpha))
            .sum()
    }

    /// `L` with `||Q(v1) e - Q(v2) e||_{H^alpha} <= L ||v1 - v2||_{H^alpha} |e|`.
    pub fn lipschitz_constant(&self) -> f64 {
        let s: f64 = self
            .basis
            .iter()
            .zip(&self.q)
            .map(|(b, q)| q * q * (1.0 + b.k_squared()).powf(self.alpha))
            .sum();
        self.gain * s.sqrt()
    }
}

/// `Q(v) dW` for one increment, building the coefficient from `config`.
pub fn apply_q(
    v: &SpectralField,
    inc: &NoiseIncrement,
    config: &NoiseConfig,
    alpha: f64,
) -> Result<SpectralField> {
    VelocityNoise::new(*v.grid(), config, alpha)?.apply(v, &inc.dw)
}
