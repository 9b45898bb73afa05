use std::f64::consts::PI;

use crate::error::{NspdError, Result};

pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

/// Uniform collocation grid on the torus `[-pi, pi]^dim`.
///
/// Grid point `j` along an axis sits at `-pi + 2 pi j / n`; wavenumbers along an
/// axis are the integers in `[-n/2, n/2)`, stored in FFT order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    dealias_fraction: Option<f64>,
}

impl Grid {
    /// A grid with the default 2/3 dealiasing rule.
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::with_dealias(dim, n, Some(DEFAULT_DEALIAS_FRACTION))
    }

    pub fn with_dealias(dim: usize, n: usize, dealias_fraction: Option<f64>) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return Err(NspdError::Shape(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(NspdError::Shape(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if let Some(f) = dealias_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(NspdError::Domain(format!(
                    "dealias fraction must lie in (0, 1], got {f}"
                )));
            }
        }
        Ok(Self {
            dim,
            n,
            dealias_fraction,
        })
    }

    /// Auxiliary grid used for padded product evaluation; `n` only needs to be even.
    pub(crate) fn padded(dim: usize, n: usize) -> Self {
        debug_assert!(n.is_multiple_of(2));
        Self {
            dim,
            n,
            dealias_fraction: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_fraction(&self) -> Option<f64> {
        self.dealias_fraction
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed wavenumber for an FFT-ordered axis index.
    #[inline]
    pub fn wavenumber(&self, index: usize) -> i64 {
        let n = self.n as i64;
        let i = index as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT-ordered axis index for a signed wavenumber (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Per-axis indices of a flat (row-major, axis 0 slowest) position.
    #[inline]
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    #[inline]
    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Wavevector of a flat spectral position; unused trailing entries are zero.
    #[inline]
    pub fn mode(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut k = [0i64; 3];
        for (a, slot) in k.iter_mut().enumerate().take(self.dim) {
            *slot = self.wavenumber(idx[a]);
        }
        k
    }

    /// Flat spectral position of a wavevector.
    pub fn flat_of_mode(&self, k: &[i64]) -> usize {
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            idx[a] = self.index_of(k[a]);
        }
        self.flatten(idx)
    }

    #[inline]
    pub fn k_squared(&self, flat: usize) -> f64 {
        let k = self.mode(flat);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
    }

    /// True when some component of the wavevector equals the unpaired Nyquist value `-n/2`.
    #[inline]
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = (self.n / 2) as i64;
        self.mode(flat)[..self.dim].iter().any(|&k| k == -half)
    }

    /// Largest retained |k_j| under the dealiasing rule.
    pub fn dealias_cutoff(&self) -> Option<i64> {
        self.dealias_fraction
            .map(|f| (f * (self.n as f64) / 2.0 + 1e-12).floor() as i64)
    }

    /// Whether a mode survives dealiasing. Always true when dealiasing is disabled.
    #[inline]
    pub fn is_retained(&self, flat: usize) -> bool {
        match self.dealias_cutoff() {
            None => true,
            Some(c) => self.mode(flat)[..self.dim].iter().all(|k| k.abs() <= c),
        }
    }

    /// Number of modes kept by [`crate::spectral::dealias`].
    pub fn retained_mode_count(&self) -> usize {
        match self.dealias_cutoff() {
            None => self.len(),
            Some(c) => {
                let per_axis = (2 * c + 1).min(self.n as i64) as usize;
                per_axis.pow(self.dim as u32)
            }
        }
    }

    /// Physical coordinates of a flat grid position.
    #[inline]
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflatten(flat);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -PI + h * idx[a] as f64;
        }
        x
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight of one grid cell, `(2 pi / n)^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume of the torus, `(2 pi)^dim`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    pub(crate) fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.n == other.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(1, 16).is_err());
        assert!(Grid::new(2, 4).is_err());
        assert!(Grid::new(2, 24).is_err());
        assert!(Grid::with_dealias(2, 16, Some(0.0)).is_err());
        assert!(Grid::new(3, 8).is_ok());
    }

    #[test]
    fn wavenumbers_cover_half_open_range() {
        let g = Grid::new(2, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for k in -4..4 {
            assert_eq!(g.wavenumber(g.index_of(k)), k);
        }
    }

    #[test]
    fn flatten_round_trips() {
        let g = Grid::new(3, 8).unwrap();
        for flat in [0, 1, 9, 77, 511] {
            assert_eq!(g.flatten(g.unflatten(flat)), flat);
        }
        let k = [-3, 2, 1];
        assert_eq!(g.mode(g.flat_of_mode(&k)), k);
    }

    #[test]
    fn retained_count_matches_lattice() {
        let g = Grid::new(2, 64).unwrap();
        assert_eq!(g.dealias_cutoff(), Some(21));
        assert_eq!(g.retained_mode_count(), 43 * 43);
        let brute = (0..g.len()).filter(|&f| g.is_retained(f)).count();
        assert_eq!(brute, 43 * 43);
    }
}
