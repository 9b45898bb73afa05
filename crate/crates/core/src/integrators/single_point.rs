use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{NspdError, Result};
use crate::nonlinear::cross;

use super::steps::{ito_point, rotate_point};

/// Setup of the single-point director noise comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakConsistencySetup {
    pub d0: [f64; 3],
    pub h: [f64; 3],
    pub horizon: f64,
    /// Step sizes, each half the previous.
    pub dts: Vec<f64>,
    pub n_paths: usize,
    pub seed: u64,
    /// Cross-product sign of `G`.
    pub sign: f64,
    /// Sign of the drift correction in the Ito step; `+1` is consistent.
    pub correction_sign: f64,
}

impl Default for WeakConsistencySetup {
    fn default() -> Self {
        Self {
            d0: [0.0, 0.6, 0.8],
            h: [1.0, 0.0, 0.0],
            horizon: 1.0,
            dts: vec![0.1, 0.05, 0.025, 0.0125],
            n_paths: 10_000,
            seed: 0,
            sign: 1.0,
            correction_sign: 1.0,
        }
    }
}

/// `E[f(d_ito)] - E[f(d_rot)]` per step size for `f(d) = d_3`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakConsistency {
    pub dts: Vec<f64>,
    pub mean_diff: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Least-squares slope of `log |mean_diff|` against `log dt`.
    pub slope: f64,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// One path at one level: `f(d_ito) - f(d_rot) - C`, where the zero-mean control variate
/// `C = sum_j 1/2 (dt - d_eta_j^2) e_3 . R_j G^2(d_j)` transports each step's
/// Ito-Milstein defect to the end time with the exact rotation `R_j` of the remaining path.
fn path_sample(s: &WeakConsistencySetup, incs: &[f64], dt: f64) -> f64 {
    let n = incs.len();
    let mut remaining = vec![0.0; n];
    let mut acc = 0.0;
    for j in (0..n).rev() {
        remaining[j] = acc;
        acc += incs[j];
    }
    let mut d = s.d0;
    let mut control = 0.0;
    for (j, &w) in incs.iter().enumerate() {
        let g = cross(d, s.h);
        let g2 = cross(g, s.h);
        let transported = rotate_point(g2, s.h, remaining[j], s.sign);
        control += 0.5 * (dt - w * w) * transported[2];
        d = ito_point(d, s.h, w, dt, s.sign, s.correction_sign);
    }
    let rot = rotate_point(s.d0, s.h, acc, s.sign);
    d[2] - rot[2] - control
}

/// Weak difference between the Ito step with drift correction and the exact rotation step
/// on a single grid point. All step sizes reuse the finest increments of each path.
pub fn weak_consistency(setup: &WeakConsistencySetup) -> Result<WeakConsistency> {
    let dts = &setup.dts;
    if dts.len() < 2 || setup.n_paths < 2 {
        return Err(NspdError::Domain("need at least two step sizes and two paths".into()));
    }
    let finest = *dts.last().expect("non-empty");
    let factors: Vec<usize> = dts
        .iter()
        .map(|dt| {
            let f = dt / finest;
            let r = f.round();
            if (f - r).abs() > 1e-9 || r < 1.0 {
                Err(NspdError::Domain(format!("step {dt} is not a multiple of {finest}")))
            } else {
                Ok(r as usize)
            }
        })
        .collect::<Result<_>>()?;
    let n_fine = (setup.horizon / finest).round() as usize;
    if factors.iter().any(|f| !n_fine.is_multiple_of(*f)) {
        return Err(NspdError::Domain("horizon is not a whole number of coarse steps".into()));
    }
    let samples: Vec<Vec<f64>> = (0..setup.n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(setup.seed);
            rng.set_stream(p as u64);
            let sd = finest.sqrt();
            let fine: Vec<f64> = (0..n_fine)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    sd * z
                })
                .collect();
            factors
                .iter()
                .zip(dts)
                .map(|(&f, &dt)| {
                    let coarse: Vec<f64> = fine.chunks(f).map(|c| c.iter().sum()).collect();
                    path_sample(setup, &coarse, dt)
                })
                .collect()
        })
        .collect();
    let np = setup.n_paths as f64;
    let mut mean_diff = Vec::with_capacity(dts.len());
    let mut std_err = Vec::with_capacity(dts.len());
    for level in 0..dts.len() {
        let m = samples.iter().map(|s| s[level]).sum::<f64>() / np;
        let var = samples.iter().map(|s| (s[level] - m).powi(2)).sum::<f64>() / (np - 1.0);
        mean_diff.push(m);
        std_err.push((var / np).sqrt());
    }
    let slope = log_log_slope(dts, &mean_diff);
    Ok(WeakConsistency {
        dts: dts.clone(),
        mean_diff,
        std_err,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((log_log_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weak_difference_is_first_order() {
        let w = weak_consistency(&WeakConsistencySetup::default()).unwrap();
        assert!(w.slope >= 0.9, "{w:?}");
        for (m, s) in w.mean_diff.iter().zip(&w.std_err) {
            assert!(m.abs() > 3.0 * s, "{w:?}");
        }
    }

    #[test]
    fn flipped_correction_is_inconsistent() {
        let setup = WeakConsistencySetup {
            correction_sign: -1.0,
            n_paths: 2000,
            ..Default::default()
        };
        let w = weak_consistency(&setup).unwrap();
        assert!(w.slope < 0.5, "{w:?}");
    }
}
