use crate::error::{NspdError, Result};
use crate::spectral::{to_physical, PhysicalField, SpectralField};

/// Deviation of the director from the unit sphere at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub t: f64,
    /// `max_x ||d|^2 - 1|` over the grid.
    pub max_pointwise_dev: f64,
    /// `||(|d|^2 - 1)_-||^2_{L^2}`.
    pub y_minus: f64,
    /// `||(|d|^2 - 1)_+||^2_{L^2}`.
    pub z_plus: f64,
}

/// Constraint report from grid samples of a 3-component director.
pub fn constraint_from_physical(d: &PhysicalField, t: f64) -> ConstraintReport {
    let g = *d.grid();
    let w = g.cell_volume();
    let mut max_dev: f64 = 0.0;
    let mut y = 0.0;
    let mut z = 0.0;
    for flat in 0..g.len() {
        let v = d.vec3(flat);
        let a = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0;
        max_dev = max_dev.max(a.abs());
        if a < 0.0 {
            y += a * a;
        } else {
            z += a * a;
        }
    }
    ConstraintReport {
        t,
        max_pointwise_dev: max_dev,
        y_minus: w * y,
        z_plus: w * z,
    }
}

/// Evaluate `|d|^2 - 1` on the grid and split it into negative and positive parts.
pub fn constraint_report(d: &SpectralField, t: f64) -> Result<ConstraintReport> {
    if d.components() != 3 {
        return Err(NspdError::Shape(format!(
            "director needs 3 components, got {}",
            d.components()
        )));
    }
    Ok(constraint_from_physical(&to_physical(d), t))
}
