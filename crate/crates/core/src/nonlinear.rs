//! Nonlinear drift and noise coefficients.
//!
//! Sign ledger of the evolution (linear parts `-A v` and `gamma Delta d` excluded):
//!
//! ```text
//! velocity drift  = -B(v, v) + lambda M(d, d),   M(d, m) = -Pi div(grad d (.) grad m)
//! director drift  = -B~(v, d) + gamma |grad d|^2 d
//! noise           = (Q(v) dW, G(d) d_eta),       G(d) = s (d x h)
//! Ito correction  = +1/2 G(G(d)) dt              (the director slot of -L)
//! ```
//!
//! Quadratic and cubic products are evaluated on zero-padded grids and truncated
//! back with the dealiasing mask. `G` and its square are collocation products on
//! the base grid, matching the pointwise rotation used by the integrators.

use crate::config::{CrossConvention, MagneticFieldConfig, ModelConfig};
use crate::error::{NspdError, Result};
use crate::fields::SystemState;
use crate::spectral::{
    divergence_ratio, gradient, leray_project, partial, products::evaluate,
    products::pointwise_padded, to_physical, to_spectral, Grid, PhysicalField, SpectralField,
};
use rustfft::num_complex::Complex64;

/// Largest relative divergence accepted for an advecting velocity.
pub const ADVECTING_DIVERGENCE_TOL: f64 = 1e-10;

/// Physical constants and switches of the drift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub gamma: f64,
    pub convention: CrossConvention,
    pub linearized: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self::from(&ModelConfig::default())
    }
}

impl From<&ModelConfig> for ModelParams {
    fn from(m: &ModelConfig) -> Self {
        Self {
            lambda: m.lambda,
            gamma: m.gamma,
            convention: m.cross_convention,
            linearized: m.linearized,
        }
    }
}

/// The external field `h`, a real trigonometric polynomial with 3 components.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticFieldSpec {
    pub h: SpectralField,
}

impl MagneticFieldSpec {
    pub fn new(h: SpectralField) -> Result<Self> {
        if h.components() != 3 {
            return Err(NspdError::Shape(format!("h needs 3 components, got {}", h.components())));
        }
        Ok(Self { h })
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            h: SpectralField::zeros(grid, 3),
        }
    }

    /// Spatially constant `h`.
    pub fn constant(grid: Grid, a: [f64; 3]) -> Self {
        let mut h = SpectralField::zeros(grid, 3);
        for (c, x) in a.iter().enumerate() {
            h.component_mut(c)[0] = Complex64::new(*x, 0.0);
        }
        Self { h }
    }

    /// `h(x) = sum_j a_j cos(k_j . x)`.
    pub fn from_config(grid: Grid, cfg: &MagneticFieldConfig) -> Result<Self> {
        if cfg.wavevectors.len() != cfg.amplitudes.len() {
            return Err(NspdError::Shape("one amplitude per wavevector is required".into()));
        }
        let mut h = SpectralField::zeros(grid, 3);
        for (k, a) in cfg.wavevectors.iter().zip(&cfg.amplitudes) {
            let mut kk = [0i64; 3];
            for (slot, x) in kk.iter_mut().zip(k.iter()) {
                *slot = *x;
            }
            let neg = [-kk[0], -kk[1], -kk[2]];
            let zero = kk.iter().all(|x| *x == 0);
            for c in 0..3 {
                let f = grid.flat_of_mode(&kk);
                if zero {
                    h.component_mut(c)[f] += Complex64::new(a[c], 0.0);
                } else {
                    let fneg = grid.flat_of_mode(&neg);
                    h.component_mut(c)[f] += Complex64::new(0.5 * a[c], 0.0);
                    h.component_mut(c)[fneg] += Complex64::new(0.5 * a[c], 0.0);
                }
            }
        }
        Ok(Self { h })
    }

    pub fn is_zero(&self) -> bool {
        self.h.max_abs_coeff() == 0.0
    }

    pub fn physical(&self) -> PhysicalField {
        to_physical(&self.h)
    }
}

#[inline]
pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn require(f: &SpectralField, comps: usize, what: &str) -> Result<()> {
    if f.components() != comps {
        return Err(NspdError::Shape(format!(
            "{what} needs {comps} components, got {}",
            f.components()
        )));
    }
    Ok(())
}

fn same_grid(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if a.grid().dim() != b.grid().dim() || a.grid().n() != b.grid().n() {
        return Err(NspdError::Shape("operands live on different grids".into()));
    }
    Ok(())
}

fn require_solenoidal(u: &SpectralField) -> Result<()> {
    let r = divergence_ratio(u)?;
    if r > ADVECTING_DIVERGENCE_TOL {
        return Err(NspdError::Precondition(format!(
            "advecting velocity has divergence ratio {r:e} above {ADVECTING_DIVERGENCE_TOL:e}"
        )));
    }
    Ok(())
}

/// `(u . grad) w` for a field `w` with any number of components; `grad_w` is its gradient.
fn advect(u: &SpectralField, grad_w: &SpectralField, comps: usize) -> SpectralField {
    let dim = u.grid().dim();
    pointwise_padded(&[u, grad_w], 2, comps, |x, o| {
        let (uu, g) = x.split_at(dim);
        for (c, slot) in o.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..dim {
                s += uu[j] * g[c * dim + j];
            }
            *slot = s;
        }
    })
}

/// Row-wise divergence `(div T)_i = sum_j d_j T_ij` of a `dim x dim` tensor.
fn tensor_divergence(t: &SpectralField) -> SpectralField {
    let g = *t.grid();
    let dim = g.dim();
    let mut out = SpectralField::zeros(g, dim);
    for i in 0..dim {
        for j in 0..dim {
            let p = partial(t, i * dim + j, j);
            for (o, x) in out.component_mut(i).iter_mut().zip(p.component(0)) {
                *o += x;
            }
        }
    }
    out
}

/// `T_ij = sum_k d_i d^k d_j m^k` from the two Jacobians.
fn stress_tensor(grad_d: &SpectralField, grad_m: &SpectralField) -> SpectralField {
    let dim = grad_d.grid().dim();
    let n = 3 * dim;
    pointwise_padded(&[grad_d, grad_m], 2, dim * dim, |x, o| {
        let (gd, gm) = x.split_at(n);
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for k in 0..3 {
                    s += gd[k * dim + i] * gm[k * dim + j];
                }
                o[i * dim + j] = s;
            }
        }
    })
}

/// `B(u, w) = Pi((u . grad) w)`; `u` must be solenoidal.
pub fn convective_b(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    let dim = u.grid().dim();
    require(u, dim, "advecting velocity")?;
    require(w, dim, "advected velocity")?;
    same_grid(u, w)?;
    require_solenoidal(u)?;
    leray_project(&advect(u, &gradient(w), dim))
}

/// `M(d, m) = -Pi div(grad d (.) grad m)`.
pub fn ericksen_stress_m(d: &SpectralField, m: &SpectralField) -> Result<SpectralField> {
    require(d, 3, "director")?;
    require(m, 3, "director")?;
    same_grid(d, m)?;
    let t = stress_tensor(&gradient(d), &gradient(m));
    leray_project(&tensor_divergence(&t).scaled(-1.0))
}

/// `B~(v, d) = (v . grad) d`.
pub fn director_convection_btilde(v: &SpectralField, d: &SpectralField) -> Result<SpectralField> {
    let dim = v.grid().dim();
    require(v, dim, "velocity")?;
    require(d, 3, "director")?;
    same_grid(v, d)?;
    Ok(advect(v, &gradient(d), 3))
}

/// `|grad d|^2 d` with the Frobenius norm of the Jacobian.
pub fn ginzburg_term(d: &SpectralField) -> Result<SpectralField> {
    require(d, 3, "director")?;
    let grad = gradient(d);
    Ok(ginzburg_from_parts(d, &grad))
}

fn ginzburg_from_parts(d: &SpectralField, grad: &SpectralField) -> SpectralField {
    let gl = 3 * d.grid().dim();
    pointwise_padded(&[grad, d], 3, 3, |x, o| {
        let s: f64 = x[..gl].iter().map(|g| g * g).sum();
        for c in 0..3 {
            o[c] = s * x[gl + c];
        }
    })
}

/// `G(d) = s (d x h)` at the grid points.
pub fn director_noise_g(
    d: &SpectralField,
    h: &SpectralField,
    convention: CrossConvention,
) -> Result<SpectralField> {
    require(d, 3, "director")?;
    require(h, 3, "h")?;
    same_grid(d, h)?;
    let s = convention.sign();
    let out = evaluate(&[&to_physical(d), &to_physical(h)], 3, |x, o| {
        let c = cross([x[0], x[1], x[2]], [x[3], x[4], x[5]]);
        for i in 0..3 {
            o[i] = s * c[i];
        }
    });
    Ok(to_spectral(&out))
}

/// `L(d) = -1/2 G(G(d)) = -1/2 (d x h) x h` at the grid points (independent of the sign `s`).
pub fn ito_correction_l(d: &SpectralField, h: &SpectralField) -> Result<SpectralField> {
    require(d, 3, "director")?;
    require(h, 3, "h")?;
    same_grid(d, h)?;
    let out = evaluate(&[&to_physical(d), &to_physical(h)], 3, |x, o| {
        let hh = [x[3], x[4], x[5]];
        let g2 = cross(cross([x[0], x[1], x[2]], hh), hh);
        for i in 0..3 {
            o[i] = -0.5 * g2[i];
        }
    });
    Ok(to_spectral(&out))
}

/// Total nonlinear drift `(drift_v, drift_d)` of the sign ledger above. With `h`,
/// the director slot also carries the Ito correction `+1/2 G(G(d))`.
pub fn full_drift_f(
    y: &SystemState,
    h: Option<&SpectralField>,
    params: &ModelParams,
) -> Result<(SpectralField, SpectralField)> {
    let grid = *y.grid();
    let dim = grid.dim();
    require(&y.v, dim, "velocity")?;
    require(&y.d, 3, "director")?;
    let (drift_v, mut drift_d) = if params.linearized {
        (SpectralField::zeros(grid, dim), SpectralField::zeros(grid, 3))
    } else {
        drift_parts(y, params)
    };
    if let Some(h) = h {
        drift_d.axpy(-1.0, &ito_correction_l(&y.d, h)?);
    }
    Ok((drift_v, drift_d))
}

/// One padded evaluation of every product in the drift.
fn drift_parts(y: &SystemState, params: &ModelParams) -> (SpectralField, SpectralField) {
    let dim = y.grid().dim();
    let gv = gradient(&y.v);
    let gd = gradient(&y.d);
    let nv = dim;
    let ngv = dim * dim;
    let ngd = 3 * dim;
    // outputs: (v.grad)v [dim], T [dim*dim], (v.grad)d [3], |grad d|^2 d [3]
    let out = pointwise_padded(&[&y.v, &gv, &y.d, &gd], 3, dim + dim * dim + 6, |x, o| {
        let v = &x[..nv];
        let g = &x[nv..nv + ngv];
        let d = &x[nv + ngv..nv + ngv + 3];
        let jd = &x[nv + ngv + 3..nv + ngv + 3 + ngd];
        for i in 0..dim {
            let mut s = 0.0;
            for j in 0..dim {
                s += v[j] * g[i * dim + j];
            }
            o[i] = s;
        }
        for i in 0..dim {
            for j in 0..dim {
                let mut s = 0.0;
                for k in 0..3 {
                    s += jd[k * dim + i] * jd[k * dim + j];
                }
                o[dim + i * dim + j] = s;
            }
        }
        let base = dim + dim * dim;
        let mut grad_sq = 0.0;
        for k in 0..3 {
            let mut s = 0.0;
            for j in 0..dim {
                s += v[j] * jd[k * dim + j];
                grad_sq += jd[k * dim + j] * jd[k * dim + j];
            }
            o[base + k] = s;
        }
        for k in 0..3 {
            o[base + 3 + k] = grad_sq * d[k];
        }
    });
    let len = y.grid().len();
    let slice = |from: usize, count: usize| {
        SpectralField::from_coeffs(
            *y.grid(),
            count,
            out.coeffs()[from * len..(from + count) * len].to_vec(),
        )
        .expect("slice has whole components")
    };
    let adv_v = slice(0, dim);
    let stress = slice(dim, dim * dim);
    let adv_d = slice(dim + dim * dim, 3);
    let gl = slice(dim + dim * dim + 3, 3);

    let mut momentum = adv_v;
    momentum.axpy(params.lambda, &tensor_divergence(&stress));
    let drift_v = leray_project(&momentum)
        .expect("momentum has dim components")
        .scaled(-1.0);
    let mut drift_d = adv_d.scaled(-1.0);
    drift_d.axpy(params.gamma, &gl);
    (drift_v, drift_d)
}
