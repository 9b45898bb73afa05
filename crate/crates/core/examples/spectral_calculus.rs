//! Fourier-side calculus on the 2-torus: divergence, Leray projection, Sobolev norms
//! and semigroup decay of a Taylor-Green vortex.

use nspd::fields::taylor_green;
use nspd::spectral::{
    divergence_ratio, gradient, leray_project, semigroup_apply, sobolev_norm, to_spectral, FractionalExponent,
    Grid, PhysicalField, Semigroup,
};
use nspd::Result;

#[derive(Debug)]
pub struct SpectralSummary {
    pub taylor_green_divergence: f64,
    /// L^2 norm left after projecting a pure gradient field.
    pub projected_gradient: f64,
    pub h1_norm: f64,
    /// `||S(t) v|| / ||v||` at `t = 0.5`; Taylor-Green has `|k|^2 = 2`, so `e^{-1}`.
    pub decay_factor: f64,
}

pub fn run_example() -> Result<SpectralSummary> {
    let grid = Grid::new(2, 32)?;
    let v = taylor_green(grid);
    let phi = to_spectral(&PhysicalField::from_fn(grid, 1, |x, out| {
        out[0] = (x[0] + 2.0 * x[1]).sin();
    }));
    let l2 = FractionalExponent::new(0.0)?;
    let decayed = semigroup_apply(&v, 0.5, Semigroup::Stokes)?;
    Ok(SpectralSummary {
        taylor_green_divergence: divergence_ratio(&v)?,
        projected_gradient: sobolev_norm(&leray_project(&gradient(&phi))?, l2),
        h1_norm: sobolev_norm(&v, FractionalExponent::new(1.0)?),
        decay_factor: sobolev_norm(&decayed, l2) / sobolev_norm(&v, l2),
    })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let s = run_example()?;
    println!("Taylor-Green divergence ratio: {:.2e}", s.taylor_green_divergence);
    println!("|Pi grad phi|_L2:              {:.2e}", s.projected_gradient);
    println!("|v|_H1:                        {:.6}", s.h1_norm);
    println!("|S(0.5) v| / |v|:              {:.12} (e^-1 = {:.12})", s.decay_factor, (-1.0f64).exp());
    Ok(())
}
