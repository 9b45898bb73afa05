//! The state `(v, d)`, initial data, and the graded product-space norms.

use crate::config::SolverConfig;
use crate::error::{NspdError, Result};
use crate::record::TrajectoryRecord;
use crate::spectral::{
    divergence_ratio, hs_norm_sq, leray_project, to_spectral, Grid, PhysicalField, SpectralField,
};

/// Relative tolerance of the solenoidality and mean-zero checks.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

/// Velocity (`dim` components, solenoidal, mean zero) and director (3 components).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub time: f64,
    pub v: SpectralField,
    pub d: SpectralField,
}

impl SystemState {
    pub fn new(time: f64, v: SpectralField, d: SpectralField) -> Result<Self> {
        let g = *v.grid();
        if v.components() != g.dim() || d.components() != 3 {
            return Err(NspdError::Shape(format!(
                "state needs {} velocity and 3 director components, got {} and {}",
                g.dim(),
                v.components(),
                d.components()
            )));
        }
        if g.dim() != d.grid().dim() || g.n() != d.grid().n() {
            return Err(NspdError::Shape("velocity and director live on different grids".into()));
        }
        Ok(Self { time, v, d })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            time: 0.0,
            v: SpectralField::zeros(grid, grid.dim()),
            d: SpectralField::zeros(grid, 3),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }

    /// Solenoidality and zero mean of `v`, within [`SOLENOIDAL_TOL`] relative to `||v||`.
    pub fn check_invariants(&self) -> Result<()> {
        let ratio = divergence_ratio(&self.v)?;
        if ratio > SOLENOIDAL_TOL {
            return Err(NspdError::Precondition(format!(
                "velocity divergence ratio {ratio:e} exceeds {SOLENOIDAL_TOL:e}"
            )));
        }
        let norm = self.v.l2_norm();
        let mean = (0..self.v.components())
            .map(|c| self.v.component(c)[0].norm())
            .fold(0.0, f64::max);
        if mean > SOLENOIDAL_TOL * norm.max(f64::MIN_POSITIVE) && mean > 0.0 {
            return Err(NspdError::Precondition(format!("velocity mean {mean:e} is not zero")));
        }
        Ok(())
    }

    /// `a * self + b * other` (time taken from `self`).
    pub fn combine(&self, a: f64, other: &SystemState, b: f64) -> SystemState {
        let mut v = self.v.scaled(a);
        v.axpy(b, &other.v);
        let mut d = self.d.scaled(a);
        d.axpy(b, &other.d);
        SystemState {
            time: self.time,
            v,
            d,
        }
    }
}

/// Which product space `H^{a}_sol x H^{a+1}` a norm is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceLevel {
    /// `a = alpha - 1`.
    H,
    /// `a = alpha`.
    V,
    /// `a = alpha + 1`.
    E,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTag {
    pub level: SpaceLevel,
    pub alpha: f64,
}

impl SpaceTag {
    pub fn new(level: SpaceLevel, alpha: f64) -> Self {
        Self { level, alpha }
    }

    /// Sobolev order of the velocity slot.
    pub fn velocity_order(&self) -> f64 {
        match self.level {
            SpaceLevel::H => self.alpha - 1.0,
            SpaceLevel::V => self.alpha,
            SpaceLevel::E => self.alpha + 1.0,
        }
    }
}

/// `||y||^2` in the product space named by `tag`.
pub fn product_norm_sq(y: &SystemState, tag: SpaceTag) -> Result<f64> {
    let dim = y.grid().dim() as f64;
    if !(tag.alpha > dim / 2.0) {
        return Err(NspdError::Domain(format!(
            "alpha must exceed dim/2 = {}, got {}",
            dim / 2.0,
            tag.alpha
        )));
    }
    let a = tag.velocity_order();
    Ok(hs_norm_sq(&y.v, a) + hs_norm_sq(&y.d, a + 1.0))
}

/// `(||v||^2_{H^a} + ||d||^2_{H^{a+1}})^{1/2}` with `a` set by the space level.
pub fn product_norm(y: &SystemState, tag: SpaceTag) -> Result<f64> {
    product_norm_sq(y, tag).map(f64::sqrt)
}

/// The two pieces of the path-space norm: `sup ||y||^2_V + int ||y||^2_E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathNorm {
    pub sup_term: f64,
    pub integral_term: f64,
}

impl PathNorm {
    pub fn total(&self) -> f64 {
        self.sup_term + self.integral_term
    }

    /// Sup of squared V norms and trapezoid of squared E norms over sample times.
    /// A single sample is extended as constant over `[0, horizon]`.
    pub fn from_samples(times: &[f64], v_norms: &[f64], e_norms: &[f64], horizon: f64) -> Result<Self> {
        if times.is_empty() || times.len() != v_norms.len() || times.len() != e_norms.len() {
            return Err(NspdError::Domain(format!(
                "path norm needs matching non-empty samples, got {} times, {} V norms, {} E norms",
                times.len(),
                v_norms.len(),
                e_norms.len()
            )));
        }
        let sup_term = v_norms.iter().map(|x| x * x).fold(0.0, f64::max);
        let integral_term = if times.len() == 1 {
            horizon * e_norms[0] * e_norms[0]
        } else {
            times
                .windows(2)
                .zip(e_norms.windows(2))
                .map(|(t, e)| 0.5 * (t[1] - t[0]) * (e[0] * e[0] + e[1] * e[1]))
                .sum()
        };
        Ok(Self {
            sup_term,
            integral_term,
        })
    }
}

/// Path norm of a recorded trajectory. The record's norms must have been taken at `alpha`.
pub fn path_norm_accumulate(record: &TrajectoryRecord, alpha: f64) -> Result<PathNorm> {
    if (record.alpha - alpha).abs() > 0.0 {
        return Err(NspdError::Domain(format!(
            "record norms were taken at alpha = {}, requested {alpha}",
            record.alpha
        )));
    }
    let t: Vec<f64> = record.rows.iter().map(|r| r.t).collect();
    let v: Vec<f64> = record.rows.iter().map(|r| r.v_alpha).collect();
    let e: Vec<f64> = record.rows.iter().map(|r| r.e_alpha).collect();
    PathNorm::from_samples(&t, &v, &e, record.t_max)
}

/// Taylor-Green velocity of unit amplitude.
pub fn taylor_green(grid: Grid) -> SpectralField {
    let p = PhysicalField::from_fn(grid, grid.dim(), |x, o| {
        if x.len() == 2 {
            o[0] = x[0].sin() * x[1].cos();
            o[1] = -x[0].cos() * x[1].sin();
        } else {
            o[0] = x[0].sin() * x[1].cos() * x[2].cos();
            o[1] = -x[0].cos() * x[1].sin() * x[2].cos();
            o[2] = 0.0;
        }
    });
    leray_project(&to_spectral(&p)).expect("velocity has dim components")
}

/// Smooth director perturbation used by the default initial data.
pub fn director_perturbation(x: &[f64]) -> [f64; 3] {
    let extra = if x.len() > 2 { x[2].sin() } else { 0.0 };
    [x[0].sin() * x[1].cos(), x[1].sin() + extra, x[0].cos()]
}

/// `modulus * (e_3 + eps p) / |e_3 + eps p|` sampled on the grid.
pub fn normalized_director(grid: Grid, eps: f64, modulus: f64) -> Result<SpectralField> {
    let mut p = PhysicalField::zeros(grid, 3);
    for flat in 0..grid.len() {
        let x = grid.point(flat);
        let q = director_perturbation(&x[..grid.dim()]);
        let w = [eps * q[0], eps * q[1], 1.0 + eps * q[2]];
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if norm < 1e-8 {
            return Err(NspdError::Validation(vec![crate::Violation {
                field: "initial.director_perturbation".into(),
                constraint: format!(
                    "perturbed director vanishes (|e3 + eps p| = {norm:e} < 1e-8) at x = {:?}",
                    &x[..grid.dim()]
                ),
                value: eps.to_string(),
            }]));
        }
        let s = modulus / norm;
        p.set_vec3(flat, [w[0] * s, w[1] * s, w[2] * s]);
    }
    Ok(to_spectral(&p))
}

/// Initial state from the config, with the initial-data amplitudes scaled by `r`.
pub fn make_initial_state_scaled(config: &SolverConfig, r: f64) -> Result<SystemState> {
    config.validate()?;
    let grid = config.build_grid()?;
    let init = &config.initial;
    let v = taylor_green(grid).scaled(r * init.taylor_green_amplitude);
    let d = normalized_director(grid, r * init.director_perturbation, init.director_modulus)?;
    SystemState::new(0.0, v, d)
}

/// Initial state `(v_0, d_0)`: Taylor-Green velocity and a normalized perturbation of `e_3`.
pub fn make_initial_state(config: &SolverConfig) -> Result<SystemState> {
    make_initial_state_scaled(config, 1.0)
}
