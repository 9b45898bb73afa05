//! Sampled ratios of the nonlinear, product and semigroup estimates, and the Psi_l limit.

use nspd::diagnostics::{lemma_ratio_suite, psi_sweep, PsiSample, RatioSuite};
use nspd::spectral::{to_spectral, Grid, PhysicalField};
use nspd::Result;

pub fn run_example() -> Result<(RatioSuite, Vec<PsiSample>)> {
    let grid = Grid::new(2, 32)?;
    let suite = lemma_ratio_suite(grid, 20, 2.0, 0)?;
    let d = to_spectral(&PhysicalField::from_fn(grid, 3, |x, out| {
        out.copy_from_slice(&[0.3 * x[0].cos(), 0.3 * x[1].sin(), 0.95 + 0.1 * (x[0] + x[1]).cos()]);
    }));
    let psi = psi_sweep(&d, &[1.0, 10.0, 100.0, 1e3, 1e4])?;
    Ok((suite, psi))
}

#[allow(dead_code)]
fn main() -> Result<()> {
    let (suite, psi) = run_example()?;
    println!("alpha = {}, delta = {}", suite.alpha, suite.delta);
    for e in &suite.entries {
        println!("{:<18} max ratio {:.4e} ({} samples)", e.name, e.max_ratio, e.used);
    }
    for p in &psi {
        println!("Psi_{:<6} = {:.8e}  gap {:.2e}", p.ell, p.psi, p.gap());
    }
    Ok(())
}
