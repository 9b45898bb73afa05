use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;

/// Real random field with Gaussian coefficients on the modes `|k_j| <= band`,
/// weighted by `(1 + |k|^2)^{-decay/2}`. Nyquist modes are zero and the result
/// is conjugate symmetric.
pub fn random_field<R: Rng + ?Sized>(
    grid: Grid,
    components: usize,
    band: i64,
    decay: f64,
    rng: &mut R,
) -> SpectralField {
    let mut f = SpectralField::zeros(grid, components);
    let len = grid.len();
    for c in 0..components {
        let comp = f.component_mut(c);
        for (flat, slot) in comp.iter_mut().enumerate() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let k = grid.mode(flat);
            if grid.is_nyquist(flat) || k[..grid.dim()].iter().any(|x| x.abs() > band) {
                continue;
            }
            let w = (1.0 + grid.k_squared(flat)).powf(-decay / 2.0);
            *slot = Complex64::new(re, im) * w;
        }
        let snapshot: Vec<Complex64> = comp.to_vec();
        for flat in 0..len {
            let k = grid.mode(flat);
            let neg = grid.flat_of_mode(&[-k[0], -k[1], -k[2]]);
            comp[flat] = (snapshot[flat] + snapshot[neg].conj()) * 0.5;
        }
        for flat in 0..len {
            if grid.is_nyquist(flat) {
                comp[flat] = Complex64::default();
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_field_is_real_and_band_limited() {
        let g = Grid::new(3, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = random_field(g, 3, 4, 1.0, &mut rng);
        assert!(f.conjugate_symmetry_defect() < 1e-15);
        for flat in 0..g.len() {
            if g.mode(flat).iter().any(|k| k.abs() > 4) {
                assert_eq!(f.component(1)[flat], Complex64::default());
            }
        }
        assert!(f.l2_norm() > 0.0);
    }
}
