use crate::error::{NspdError, Result};
use crate::spectral::{gradient, laplacian, lift, to_physical, to_spectral, PhysicalField, SpectralField};

/// Max pointwise residuals of `grad|d|^2 = 2 (grad d)^T d` and
/// `lap|d|^2 = 2 lap d . d + 2 |grad d|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    pub gradient: f64,
    pub laplacian: f64,
}

/// Both sides of each identity evaluated spectrally on a grid of twice the resolution,
/// where `|d|^2` of a band-limited `d` is represented without aliasing.
pub fn vector_identity_checks(d: &SpectralField) -> Result<IdentityResiduals> {
    if d.components() != 3 {
        return Err(NspdError::Shape(format!(
            "director needs 3 components, got {}",
            d.components()
        )));
    }
    let dim = d.grid().dim();
    let fine = to_spectral(&lift(d, 2 * d.grid().n()));
    let g = *fine.grid();
    let dp = to_physical(&fine);
    let grad = to_physical(&gradient(&fine));
    let lap = to_physical(&laplacian(&fine));

    let mut sq = PhysicalField::zeros(g, 1);
    for (flat, s) in sq.data_mut().iter_mut().enumerate() {
        let v = dp.vec3(flat);
        *s = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    }
    let sq = to_spectral(&sq);
    let grad_sq = to_physical(&gradient(&sq));
    let lap_sq = to_physical(&laplacian(&sq));

    let mut res = IdentityResiduals {
        gradient: 0.0,
        laplacian: 0.0,
    };
    for flat in 0..g.len() {
        let v = dp.vec3(flat);
        let mut grad_norm_sq = 0.0;
        for j in 0..dim {
            let mut rhs = 0.0;
            for c in 0..3 {
                let dcj = grad.component(c * dim + j)[flat];
                rhs += 2.0 * v[c] * dcj;
                grad_norm_sq += dcj * dcj;
            }
            res.gradient = res.gradient.max((grad_sq.component(j)[flat] - rhs).abs());
        }
        let l = lap.vec3(flat);
        let rhs = 2.0 * (l[0] * v[0] + l[1] * v[1] + l[2] * v[2]) + 2.0 * grad_norm_sq;
        res.laplacian = res.laplacian.max((lap_sq.component(0)[flat] - rhs).abs());
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_field, sobolev_norm, FractionalExponent, Grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn from_fn(g: Grid, f: impl Fn(&[f64]) -> [f64; 3]) -> SpectralField {
        to_spectral(&PhysicalField::from_fn(g, 3, |x, o| o.copy_from_slice(&f(x))))
    }

    #[test]
    fn constant_and_rotating_directors() {
        let g = Grid::new(2, 16).unwrap();
        let r = vector_identity_checks(&from_fn(g, |_| [0.3, -1.0, 2.0])).unwrap();
        assert!(r.gradient < 1e-13 && r.laplacian < 1e-13);
        let r = vector_identity_checks(&from_fn(g, |x| [x[0].cos(), x[0].sin(), 0.0])).unwrap();
        assert!(r.gradient <= 1e-12 && r.laplacian <= 1e-12, "{r:?}");
    }

    #[test]
    fn random_band_limited_fields() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 16).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
            let d = random_field(g, 3, 5, 0.5, &mut rng);
            let h2 = sobolev_norm(&d, FractionalExponent::new(2.0).unwrap()).powi(2);
            let r = vector_identity_checks(&d).unwrap();
            assert!(r.gradient <= 1e-8 * h2 && r.laplacian <= 1e-8 * h2, "{r:?} vs {h2}");
        }
    }
}
