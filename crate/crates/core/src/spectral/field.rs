use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use super::tables;
use crate::error::{NspdError, Result};

/// Periodic real field stored as Fourier coefficients, component-major.
///
/// Coefficients follow `f(x) = sum_k c_k e^{i k.x}`, so a constant field `c`
/// has `c_0 = c` and `sin(x_1)` has `c_{+-e_1} = -+ i/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    components: usize,
    coeffs: Vec<Complex64>,
}

/// Grid samples of a real field, component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    components: usize,
    data: Vec<f64>,
}


impl SpectralField {
    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self {
            grid,
            components,
            coeffs: vec![Complex64::default(); components * grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, components: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != components * grid.len() {
            return Err(NspdError::Shape(format!(
                "expected {} coefficients, got {}",
                components * grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid,
            components,
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let n = self.grid.len();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    /// Coefficient of component `c` at wavevector `k`.
    pub fn mode(&self, c: usize, k: &[i64]) -> Complex64 {
        self.component(c)[self.grid.flat_of_mode(k)]
    }

    pub fn set_mode(&mut self, c: usize, k: &[i64], value: Complex64) {
        let flat = self.grid.flat_of_mode(k);
        self.component_mut(c)[flat] = value;
    }

    /// Single component as its own field.
    pub fn extract(&self, c: usize) -> SpectralField {
        Self {
            grid: self.grid,
            components: 1,
            coeffs: self.component(c).to_vec(),
        }
    }

    /// Concatenate the components of several fields on the same grid.
    pub fn stack(parts: &[&SpectralField]) -> Result<SpectralField> {
        let grid = *parts
            .first()
            .ok_or_else(|| NspdError::Shape("cannot stack zero fields".into()))?
            .grid();
        let mut coeffs = Vec::new();
        let mut components = 0;
        for p in parts {
            if !p.grid.same_shape(&grid) {
                return Err(NspdError::Shape("stacked fields live on different grids".into()));
            }
            coeffs.extend_from_slice(&p.coeffs);
            components += p.components;
        }
        Ok(Self {
            grid,
            components,
            coeffs,
        })
    }

    pub(crate) fn check_same_shape(&self, other: &SpectralField) -> Result<()> {
        if !self.grid.same_shape(&other.grid) || self.components != other.components {
            return Err(NspdError::Shape(format!(
                "field shapes differ: {} comps on n={} vs {} comps on n={}",
                self.components,
                self.grid.n(),
                other.components,
                other.grid.n()
            )));
        }
        Ok(())
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "axpy shape mismatch");
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= a);
        out
    }

    /// Euclidean norm of the raw coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// L^2 norm on the torus by Parseval: `(2 pi)^dim sum |c_k|^2`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// Real L^2 inner product.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        self.grid.volume() * s
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest violation of conjugate symmetry `c_{-k} = conj(c_k)` (Nyquist modes excluded).
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = self.grid;
        let mut worst: f64 = 0.0;
        for c in 0..self.components {
            let comp = self.component(c);
            for flat in 0..g.len() {
                if g.is_nyquist(flat) {
                    continue;
                }
                let k = g.mode(flat);
                let neg = g.flat_of_mode(&[-k[0], -k[1], -k[2]]);
                worst = worst.max((comp[flat] - comp[neg].conj()).norm());
            }
        }
        worst
    }

    pub fn to_physical(&self) -> PhysicalField {
        to_physical(self)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

impl PhysicalField {
    pub fn new(grid: Grid, components: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != components * grid.len() {
            return Err(NspdError::Shape(format!(
                "expected {} samples ({} components x {} points), got {}",
                components * grid.len(),
                components,
                grid.len(),
                data.len()
            )));
        }
        Ok(Self {
            grid,
            components,
            data,
        })
    }

    pub fn zeros(grid: Grid, components: usize) -> Self {
        Self {
            grid,
            components,
            data: vec![0.0; components * grid.len()],
        }
    }

    /// Sample `f(x, out)` at every grid point; `out` has one slot per component.
    pub fn from_fn(grid: Grid, components: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let len = grid.len();
        let mut data = vec![0.0; components * len];
        let mut out = vec![0.0; components];
        for flat in 0..len {
            let x = grid.point(flat);
            f(&x[..grid.dim()], &mut out);
            for (c, v) in out.iter().enumerate() {
                data[c * len + flat] = *v;
            }
        }
        Self {
            grid,
            components,
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    /// 3-vector at a grid point (for 3-component fields).
    #[inline]
    pub fn vec3(&self, flat: usize) -> [f64; 3] {
        let n = self.grid.len();
        [
            self.data[flat],
            self.data[n + flat],
            self.data[2 * n + flat],
        ]
    }

    #[inline]
    pub fn set_vec3(&mut self, flat: usize, v: [f64; 3]) {
        let n = self.grid.len();
        self.data[flat] = v[0];
        self.data[n + flat] = v[1];
        self.data[2 * n + flat] = v[2];
    }

    /// L^2 norm by grid quadrature.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.data.iter().map(|x| x * x).sum::<f64>()).sqrt()
    }

    /// Max over grid points of the Euclidean norm across components.
    pub fn sup_norm(&self) -> f64 {
        let n = self.grid.len();
        (0..n)
            .map(|flat| {
                (0..self.components)
                    .map(|c| self.data[c * n + flat].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_spectral(&self) -> SpectralField {
        to_spectral(self)
    }
}

/// Hermitian part `(c_k + conj(c_{-k})) / 2`: the coefficient of the real part of a field.
#[inline]
fn hermitian(c: &[Complex64], neg: &[u32], i: usize) -> Complex64 {
    0.5 * (c[i] + c[neg[i] as usize].conj())
}

/// Split the transform `w` of `a + i b` for real `a`, `b` into the transforms of `a` and `b`.
#[inline]
fn split_pair(w: &[Complex64], neg: &[u32], i: usize) -> (Complex64, Complex64) {
    let z = w[i];
    let zn = w[neg[i] as usize].conj();
    (0.5 * (z + zn), Complex64::new(0.0, -0.5) * (z - zn))
}

/// Forward transform of grid samples. Components are transformed two at a time as the
/// real and imaginary parts of one complex field.
pub fn to_spectral(p: &PhysicalField) -> SpectralField {
    let g = p.grid;
    let len = g.len();
    let tab = tables::grid_tables(g.dim(), g.n());
    let scale = 1.0 / len as f64;
    let mut out = SpectralField::zeros(g, p.components);
    let mut buf = vec![Complex64::default(); len];
    for c in (0..p.components).step_by(2) {
        let paired = c + 1 < p.components;
        let a = p.component(c);
        if paired {
            for ((slot, &x), &y) in buf.iter_mut().zip(a).zip(p.component(c + 1)) {
                *slot = Complex64::new(x, y);
            }
        } else {
            for (slot, &x) in buf.iter_mut().zip(a) {
                *slot = Complex64::new(x, 0.0);
            }
        }
        fft::forward(&mut buf, g.n(), g.dim());
        let coeffs = &mut out.coeffs[c * len..(c + 1 + paired as usize) * len];
        let (ca, cb) = coeffs.split_at_mut(len);
        for i in 0..len {
            let s = scale * tab.sign[i];
            if paired {
                let (za, zb) = split_pair(&buf, &tab.neg, i);
                ca[i] = za * s;
                cb[i] = zb * s;
            } else {
                ca[i] = buf[i] * s;
            }
        }
    }
    out
}

/// Inverse transform to grid samples (real part).
pub fn to_physical(f: &SpectralField) -> PhysicalField {
    let g = f.grid;
    let len = g.len();
    let tab = tables::grid_tables(g.dim(), g.n());
    let mut out = PhysicalField::zeros(g, f.components);
    let mut buf = vec![Complex64::default(); len];
    for c in (0..f.components).step_by(2) {
        let paired = c + 1 < f.components;
        let a = f.component(c);
        if paired {
            let b = f.component(c + 1);
            for (i, slot) in buf.iter_mut().enumerate() {
                let z = hermitian(a, &tab.neg, i) + Complex64::i() * hermitian(b, &tab.neg, i);
                *slot = z * tab.sign[i];
            }
        } else {
            for (i, slot) in buf.iter_mut().enumerate() {
                *slot = a[i] * tab.sign[i];
            }
        }
        fft::inverse(&mut buf, g.n(), g.dim());
        unpack(&buf, &mut out.data[c * len..(c + 1 + paired as usize) * len], paired);
    }
    out
}

fn unpack(buf: &[Complex64], dst: &mut [f64], paired: bool) {
    let len = buf.len();
    let (da, db) = dst.split_at_mut(len);
    if paired {
        for ((x, y), v) in da.iter_mut().zip(db.iter_mut()).zip(buf) {
            *x = v.re;
            *y = v.im;
        }
    } else {
        for (x, v) in da.iter_mut().zip(buf) {
            *x = v.re;
        }
    }
}

/// Size of the padded grid that evaluates products of `degree` band-limited
/// factors without aliasing into the retained band.
pub(crate) fn padded_size(n: usize, degree: usize) -> usize {
    let m = ((degree + 1) * n).div_ceil(2);
    m + m % 2
}

/// Evaluate a field on a finer `m`-point grid by zero padding. The unpaired
/// Nyquist modes of the source grid are dropped.
pub(crate) fn lift(f: &SpectralField, m: usize) -> PhysicalField {
    let g = f.grid;
    let pg = Grid::padded(g.dim(), m);
    let plen = pg.len();
    let tab = tables::grid_tables(g.dim(), g.n());
    let ptab = tables::grid_tables(g.dim(), m);
    let map = tables::pad_map(g.dim(), g.n(), m);
    let mut out = PhysicalField::zeros(pg, f.components);
    let mut buf = vec![Complex64::default(); plen];
    for c in (0..f.components).step_by(2) {
        let paired = c + 1 < f.components;
        buf.iter_mut().for_each(|v| *v = Complex64::default());
        let a = f.component(c);
        if paired {
            let b = f.component(c + 1);
            for &(s, d) in map.iter() {
                let (s, d) = (s as usize, d as usize);
                let z = hermitian(a, &tab.neg, s) + Complex64::i() * hermitian(b, &tab.neg, s);
                buf[d] = z * ptab.sign[d];
            }
        } else {
            for &(s, d) in map.iter() {
                buf[d as usize] = a[s as usize] * ptab.sign[d as usize];
            }
        }
        fft::inverse(&mut buf, m, g.dim());
        unpack(&buf, &mut out.data[c * plen..(c + 1 + paired as usize) * plen], paired);
    }
    out
}

/// Transform padded samples and truncate to the modes of `target` (Nyquist excluded).
pub(crate) fn restrict(p: &PhysicalField, target: Grid) -> SpectralField {
    let pg = p.grid;
    let len = target.len();
    let scale = 1.0 / pg.len() as f64;
    let ptab = tables::grid_tables(pg.dim(), pg.n());
    let map = tables::pad_map(pg.dim(), target.n(), pg.n());
    let mut out = SpectralField::zeros(target, p.components);
    let mut buf = vec![Complex64::default(); pg.len()];
    for c in (0..p.components).step_by(2) {
        let paired = c + 1 < p.components;
        let a = p.component(c);
        if paired {
            for ((slot, &x), &y) in buf.iter_mut().zip(a).zip(p.component(c + 1)) {
                *slot = Complex64::new(x, y);
            }
        } else {
            for (slot, &x) in buf.iter_mut().zip(a) {
                *slot = Complex64::new(x, 0.0);
            }
        }
        fft::forward(&mut buf, pg.n(), pg.dim());
        let coeffs = &mut out.coeffs[c * len..(c + 1 + paired as usize) * len];
        let (ca, cb) = coeffs.split_at_mut(len);
        for &(s, d) in map.iter() {
            let (s, d) = (s as usize, d as usize);
            let w = scale * ptab.sign[d];
            if paired {
                let (za, zb) = split_pair(&buf, &ptab.neg, d);
                ca[s] = za * w;
                cb[s] = zb * w;
            } else {
                ca[s] = buf[d] * w;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_field_lands_on_zero_mode() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicalField::from_fn(g, 1, |_, out| out[0] = 2.5);
        let f = to_spectral(&p);
        assert!((f.component(0)[0].re - 2.5).abs() < 1e-14);
        let rest: f64 = f.component(0)[1..].iter().map(|c| c.norm()).sum();
        assert!(rest < 1e-13);
    }

    #[test]
    fn sine_has_two_modes() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicalField::from_fn(g, 1, |x, out| out[0] = x[0].sin());
        let f = to_spectral(&p);
        // sin x = (e^{ix} - e^{-ix}) / 2i
        assert!((f.mode(0, &[1, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((f.mode(0, &[-1, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        let nonzero = f.coeffs().iter().filter(|c| c.norm() > 1e-12).count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn white_noise_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, n) in [(2, 32), (3, 8)] {
            let g = Grid::new(dim, n).unwrap();
            let data: Vec<f64> = (0..3 * g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = PhysicalField::new(g, 3, data.clone()).unwrap();
            let back = to_physical(&to_spectral(&p));
            let err = back
                .data()
                .iter()
                .zip(&data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let scale = data.iter().map(|x| x.abs()).fold(0.0, f64::max);
            assert!(err <= 1e-12 * scale, "round trip error {err}");
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = Grid::new(2, 8).unwrap();
        assert!(matches!(
            PhysicalField::new(g, 1, vec![0.0; 10]),
            Err(NspdError::Shape(_))
        ));
    }

    #[test]
    fn padding_reproduces_band_limited_samples() {
        let g = Grid::new(2, 16).unwrap();
        let p = PhysicalField::from_fn(g, 1, |x, out| out[0] = (3.0 * x[0]).cos() * x[1].sin());
        let f = to_spectral(&p);
        let lifted = lift(&f, 24);
        let pg = *lifted.grid();
        for flat in (0..pg.len()).step_by(37) {
            let x = pg.point(flat);
            let exact = (3.0 * x[0]).cos() * x[1].sin();
            assert!((lifted.data()[flat] - exact).abs() < 1e-13);
        }
        let back = restrict(&lifted, g);
        assert!((&back - &f).coeff_norm() < 1e-14);
    }
}
