//! The nonlinear drift terms on simple fields.
//!
//! Taylor-Green is a steady Euler flow, so `B(v, v)` is a pure gradient and vanishes after
//! projection. A unit director depending on one coordinate carries no Ericksen force.

use nspd::config::CrossConvention;
use nspd::fields::{normalized_director, taylor_green};
use nspd::nonlinear::{convective_b, director_noise_g, ericksen_stress_m, ginzburg_term};
use nspd::spectral::{sobolev_norm, to_spectral, FractionalExponent, Grid, PhysicalField};
use nspd::Result;

#[derive(Debug)]
pub struct DriftSummary {
    pub taylor_green_convection: f64,
    pub planar_director_stress: f64,
    pub ginzburg: f64,
    /// `|G(d)|_L2` for `h = e1`.
    pub noise_g: f64,
}

pub fn run_example() -> Result<DriftSummary> {
    let grid = Grid::new(2, 32)?;
    let l2 = FractionalExponent::new(0.0)?;
    let v = taylor_green(grid);
    let planar = to_spectral(&PhysicalField::from_fn(grid, 3, |x, out| {
        out.copy_from_slice(&[x[0].cos(), x[0].sin(), 0.0]);
    }));
    let d = normalized_director(grid, 0.2, 1.0)?;
    let h = to_spectral(&PhysicalField::from_fn(grid, 3, |_, out| {
        out.copy_from_slice(&[1.0, 0.0, 0.0]);
    }));
    Ok(DriftSummary {
        taylor_green_convection: sobolev_norm(&convective_b(&v, &v)?, l2),
        planar_director_stress: sobolev_norm(&ericksen_stress_m(&planar, &planar)?, l2),
        ginzburg: sobolev_norm(&ginzburg_term(&d)?, l2),
        noise_g: sobolev_norm(&director_noise_g(&d, &h, CrossConvention::DCrossH)?, l2),
    })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let s = run_example()?;
    println!("|B(v, v)|       Taylor-Green:   {:.2e}", s.taylor_green_convection);
    println!("|M(d, d)|       planar director: {:.2e}", s.planar_director_stress);
    println!("||grad d|^2 d|  perturbed d:     {:.6}", s.ginzburg);
    println!("|d x h|         h = e1:          {:.6}", s.noise_g);
    Ok(())
}
