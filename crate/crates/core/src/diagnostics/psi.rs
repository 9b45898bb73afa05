use crate::error::{NspdError, Result};
use crate::spectral::{to_physical, SpectralField};

/// Increasing C^2 step `phi: R -> [-1, 0]`, equal to `-1` on `(-inf, -2]` and `0` on
/// `[-1, inf)`, with a quintic smoothstep between.
pub fn mollifier(s: f64) -> f64 {
    if s <= -2.0 {
        -1.0
    } else if s >= -1.0 {
        0.0
    } else {
        let t = s + 2.0;
        -1.0 + t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

/// `Psi_l(d) = int (|d|^2 - 1)^2 |phi(l (|d|^2 - 1))| dx` by grid quadrature.
pub fn psi_ell(d: &SpectralField, ell: f64) -> Result<f64> {
    Ok(psi_sample(d, ell)?.psi)
}

/// `Psi_l` next to its limit `||(|d|^2 - 1)_-||^2_{L^2}` on the same quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiSample {
    pub ell: f64,
    pub psi: f64,
    pub y_minus: f64,
}

impl PsiSample {
    pub fn gap(&self) -> f64 {
        (self.psi - self.y_minus).abs()
    }
}

pub fn psi_sample(d: &SpectralField, ell: f64) -> Result<PsiSample> {
    Ok(psi_sweep(d, &[ell])?[0])
}

/// `Psi_l` for each `l` in `ells`, reusing one evaluation of `|d|^2`.
pub fn psi_sweep(d: &SpectralField, ells: &[f64]) -> Result<Vec<PsiSample>> {
    if d.components() != 3 {
        return Err(NspdError::Shape(format!(
            "director needs 3 components, got {}",
            d.components()
        )));
    }
    if let Some(bad) = ells.iter().find(|l| !(**l >= 1.0) || !l.is_finite()) {
        return Err(NspdError::Domain(format!("ell must be a finite value >= 1, got {bad}")));
    }
    let p = to_physical(d);
    let w = d.grid().cell_volume();
    let a: Vec<f64> = (0..d.grid().len())
        .map(|flat| {
            let v = p.vec3(flat);
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0
        })
        .collect();
    let y_minus = w * a.iter().filter(|x| **x < 0.0).map(|x| x * x).sum::<f64>();
    Ok(ells
        .iter()
        .map(|&ell| PsiSample {
            ell,
            psi: w * a.iter().map(|x| x * x * mollifier(ell * x).abs()).sum::<f64>(),
            y_minus,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, to_spectral, Grid, PhysicalField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mollifier_shape() {
        assert_eq!(mollifier(-5.0), -1.0);
        assert_eq!(mollifier(-2.0), -1.0);
        assert_eq!(mollifier(-1.0), 0.0);
        assert_eq!(mollifier(3.0), 0.0);
        assert!((mollifier(-1.5) + 0.5).abs() < 1e-15);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let s = -2.0 + i as f64 / 1000.0;
            let m = mollifier(s);
            assert!(m >= prev && (-1.0..=0.0).contains(&m));
            prev = m;
        }
        // first and second one-sided derivatives vanish at both joints
        let h = 1e-4;
        for s in [-2.0, -1.0] {
            let d1 = (mollifier(s + h) - mollifier(s - h)) / (2.0 * h);
            let d2 = (mollifier(s + h) - 2.0 * mollifier(s) + mollifier(s - h)) / (h * h);
            assert!(d1.abs() < 1e-6 && d2.abs() < 1e-2, "s = {s}: {d1} {d2}");
        }
    }

    #[test]
    fn unit_and_saturated_constants() {
        let g = Grid::new(2, 16).unwrap();
        let unit = to_spectral(&PhysicalField::from_fn(g, 3, |x, o| {
            o.copy_from_slice(&[x[0].cos(), x[0].sin(), 0.0])
        }));
        for ell in [1.0, 10.0, 1e4] {
            assert!(psi_ell(&unit, ell).unwrap() < 1e-26);
        }
        let ell: f64 = 100.0;
        let r = (1.0 - 3.0 / ell).sqrt();
        let c = to_spectral(&PhysicalField::from_fn(g, 3, |_, o| o.copy_from_slice(&[0.0, 0.0, r])));
        let expect = (3.0 / ell).powi(2) * g.volume();
        assert!((psi_ell(&c, ell).unwrap() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn sweep_converges_monotonically_to_y_minus() {
        let g = Grid::new(2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut d = random_field(g, 3, 4, 1.0, &mut rng);
        let s = 1.5 / to_physical(&d).sup_norm();
        d = d.scaled(s);
        let ells: Vec<f64> = (0..=10).map(|i| 10f64.powf(i as f64 * 0.5)).collect();
        let sweep = psi_sweep(&d, &ells).unwrap();
        assert!(sweep[0].y_minus > 0.0);
        for w in sweep.windows(2) {
            assert!(w[1].gap() <= w[0].gap());
        }
        let at_1e4 = sweep.iter().find(|p| p.ell == 1e4).unwrap();
        assert!(at_1e4.gap() <= 1e-6);
        assert!(psi_ell(&d, 0.5).is_err());
    }
}
