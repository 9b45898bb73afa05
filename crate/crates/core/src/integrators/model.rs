use crate::config::{SchemeSpec, SchemeVariant, SolverConfig};
use crate::diagnostics::constraint_from_physical;
use crate::error::{NspdError, Result};
use crate::fields::{product_norm_sq, SpaceLevel, SpaceTag, SystemState};
use crate::noise::{NoiseIncrement, VelocityNoise};
use crate::nonlinear::{full_drift_f, MagneticFieldSpec, ModelParams};
use crate::record::DiagnosticRow;
use crate::spectral::{
    divergence_ratio, gradient, heat_flow, to_physical, to_spectral, Grid, PhysicalField,
    Semigroup, SpectralField,
};

use super::steps::{director_flow, ito_director, renormalize_director, rotate_director, step_velocity};

/// Everything a step needs that does not change along a trajectory.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: Grid,
    pub alpha: f64,
    pub params: ModelParams,
    pub scheme: SchemeSpec,
    pub velocity_noise: VelocityNoise,
    pub h: MagneticFieldSpec,
    h_phys: PhysicalField,
    sigma_zero: bool,
    h_zero: bool,
}

impl Model {
    pub fn from_config(config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.build_grid()?;
        let h = MagneticFieldSpec::from_config(grid, &config.magnetic)?;
        let h_phys = h.physical();
        let h_zero = h.is_zero();
        Ok(Self {
            grid,
            alpha: config.model.alpha,
            params: ModelParams::from(&config.model),
            scheme: config.scheme.clone(),
            velocity_noise: VelocityNoise::new(grid, &config.noise, config.model.alpha)?,
            h,
            h_phys,
            sigma_zero: config.noise.sigma == 0.0 || config.noise.n_modes == 0,
            h_zero,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.velocity_noise.n_modes()
    }

    /// `diag(S(t), T(gamma t))` applied to a state.
    pub fn semigroup(&self, y: &SystemState, t: f64) -> Result<SystemState> {
        Ok(SystemState {
            time: y.time + t,
            v: heat_flow(&y.v, t, 1.0, Semigroup::Stokes)?,
            d: heat_flow(&y.d, t, self.params.gamma, Semigroup::Heat)?,
        })
    }

    /// Nonlinear drift; `ito` adds the correction `+1/2 G(G(d))` to the director slot.
    pub fn drift(&self, y: &SystemState, ito: bool) -> Result<SystemState> {
        let h = (ito && !self.h_zero).then_some(&self.h.h);
        let (v, d) = full_drift_f(y, h, &self.params)?;
        Ok(SystemState { time: y.time, v, d })
    }

    /// Noise term `(Q(v) dW, G(d) d_eta)` evaluated at `y`.
    pub fn noise_term(&self, y: &SystemState, inc: &NoiseIncrement) -> Result<SystemState> {
        let v = if self.sigma_zero {
            SpectralField::zeros(self.grid, self.grid.dim())
        } else {
            self.velocity_noise.apply(&y.v, &inc.dw)?
        };
        let d = if self.h_zero || inc.d_eta == 0.0 {
            SpectralField::zeros(self.grid, 3)
        } else {
            let s = self.params.convention.sign() * inc.d_eta;
            let dp = to_physical(&y.d);
            let mut out = PhysicalField::zeros(self.grid, 3);
            for flat in 0..self.grid.len() {
                let g = crate::nonlinear::cross(dp.vec3(flat), self.h_phys.vec3(flat));
                out.set_vec3(flat, [s * g[0], s * g[1], s * g[2]]);
            }
            to_spectral(&out)
        };
        Ok(SystemState { time: y.time, v, d })
    }

    /// One step of the splitting scheme from `y` over `dt` with increment `inc`.
    pub fn step(&self, y: &SystemState, inc: &NoiseIncrement, dt: f64, step: usize) -> Result<SystemState> {
        let drift = self.drift(y, false)?;
        let noise_v = if self.sigma_zero {
            None
        } else {
            Some(self.velocity_noise.apply(&y.v, &inc.dw)?)
        };
        let v = step_velocity(&y.v, &drift.v, noise_v.as_ref(), dt, step)?;
        let mut d = director_flow(&y.d, &drift.d, dt, self.params.gamma, step)?;

        let noisy_director = !self.h_zero && inc.d_eta != 0.0;
        let ito = self.scheme.variant == SchemeVariant::ItoPlusCorrection && !self.h_zero;
        if noisy_director || ito || self.scheme.renormalize_director {
            let mut p = to_physical(&d);
            let sign = self.params.convention.sign();
            match self.scheme.variant {
                SchemeVariant::StratonovichRotation => {
                    if noisy_director {
                        rotate_director(&mut p, &self.h_phys, inc.d_eta, sign);
                    }
                }
                SchemeVariant::ItoPlusCorrection => {
                    if ito {
                        ito_director(
                            &mut p,
                            &self.h_phys,
                            inc.d_eta,
                            dt,
                            sign,
                            self.scheme.ito_correction_sign,
                        );
                    }
                }
            }
            if self.scheme.renormalize_director {
                renormalize_director(&mut p);
            }
            d = to_spectral(&p);
        }
        if !d.is_finite() {
            return Err(NspdError::NumericalFailure { step });
        }
        Ok(SystemState {
            time: y.time + dt,
            v,
            d,
        })
    }

    /// Diagnostic scalars of a state.
    pub fn diagnostics(&self, y: &SystemState, step: usize) -> Result<DiagnosticRow> {
        let v2 = product_norm_sq(y, SpaceTag::new(SpaceLevel::V, self.alpha))?;
        let e2 = product_norm_sq(y, SpaceTag::new(SpaceLevel::E, self.alpha))?;
        let c = constraint_from_physical(&to_physical(&y.d), y.time);
        let grad = to_physical(&gradient(&y.d));
        Ok(DiagnosticRow {
            step,
            t: y.time,
            v_alpha: v2.sqrt(),
            e_alpha: e2.sqrt(),
            max_dev: c.max_pointwise_dev,
            y_minus: c.y_minus,
            z_plus: c.z_plus,
            energy: y.v.l2_norm().powi(2),
            divergence: divergence_ratio(&y.v)?,
            grad_d_sup: grad.sup_norm(),
        })
    }
}
