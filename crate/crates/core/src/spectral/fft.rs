//! Multi-dimensional complex FFTs built from cached one-dimensional plans.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Direction {
    Forward,
    Inverse,
}

type PlanCache = Mutex<HashMap<(usize, Direction), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry((n, dir))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            match dir {
                Direction::Forward => planner.plan_fft_forward(n),
                Direction::Inverse => planner.plan_fft_inverse(n),
            }
        })
        .clone()
}

fn transform(data: &mut [Complex64], n: usize, dim: usize, dir: Direction) {
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let fft = plan(n, dir);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // innermost axis: lines are contiguous
    fft.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    // other axes: transpose each [n][stride] block so its lines become contiguous
    let mut buf = vec![Complex64::default(); data.len()];
    for axis in 0..dim - 1 {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = n * stride;
        for (src, dst) in data.chunks_exact(block).zip(buf.chunks_exact_mut(block)) {
            for j in 0..n {
                for i in 0..stride {
                    dst[i * n + j] = src[j * stride + i];
                }
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (dst, src) in data.chunks_exact_mut(block).zip(buf.chunks_exact(block)) {
            for j in 0..n {
                for i in 0..stride {
                    dst[j * stride + i] = src[i * n + j];
                }
            }
        }
    }
}

/// Unnormalized forward transform, `X_k = sum_j x_j e^{-2 pi i j k / n}` per axis.
pub(crate) fn forward(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, Direction::Forward);
}

/// Unnormalized inverse transform, `x_j = sum_k X_k e^{+2 pi i j k / n}` per axis.
pub(crate) fn inverse(data: &mut [Complex64], n: usize, dim: usize) {
    transform(data, n, dim, Direction::Inverse);
}
