//! Per-grid index tables shared by the transforms, built once and cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::grid::Grid;

pub(crate) struct GridTables {
    /// `(-1)^{sum of axis indices}`: shifts samples from `[0, 2pi)` to `[-pi, pi)`.
    pub sign: Vec<f64>,
    /// Flat position of the mode `-k` for each `k`.
    pub neg: Vec<u32>,
    /// Wavevector of each mode, zero-padded to three entries.
    pub k: Vec<[f64; 3]>,
    /// Wavevector used by derivatives: zero on the unpaired Nyquist modes.
    pub dk: Vec<[f64; 3]>,
    pub ksq: Vec<f64>,
}

/// Source and padded flat positions of every non-Nyquist mode of an `n`-grid.
pub(crate) type PadMap = Vec<(u32, u32)>;

type Cache<K, V> = Mutex<HashMap<K, Arc<V>>>;

fn cached<K: std::hash::Hash + Eq, V>(cache: &Cache<K, V>, key: K, build: impl FnOnce() -> V) -> Arc<V> {
    let mut map = cache.lock().expect("table cache poisoned");
    map.entry(key).or_insert_with(|| Arc::new(build())).clone()
}

pub(crate) fn grid_tables(dim: usize, n: usize) -> Arc<GridTables> {
    static CACHE: OnceLock<Cache<(usize, usize), GridTables>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), (dim, n), || {
        let g = Grid::padded(dim, n);
        let len = g.len();
        let mut sign = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        let mut k = Vec::with_capacity(len);
        let mut dk = Vec::with_capacity(len);
        let mut ksq = Vec::with_capacity(len);
        for flat in 0..len {
            let m = g.mode(flat);
            let kf = [m[0] as f64, m[1] as f64, m[2] as f64];
            k.push(kf);
            dk.push(if g.is_nyquist(flat) { [0.0; 3] } else { kf });
            ksq.push(g.k_squared(flat));
            let idx = g.unflatten(flat);
            sign.push(if (idx[0] + idx[1] + idx[2]).is_multiple_of(2) { 1.0 } else { -1.0 });
            let mut nidx = [0usize; 3];
            for a in 0..dim {
                nidx[a] = (n - idx[a]) % n;
            }
            neg.push(g.flatten(nidx) as u32);
        }
        GridTables { sign, neg, k, dk, ksq }
    })
}

pub(crate) fn pad_map(dim: usize, n: usize, m: usize) -> Arc<PadMap> {
    static CACHE: OnceLock<Cache<(usize, usize, usize), PadMap>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), (dim, n, m), || {
        let g = Grid::padded(dim, n);
        let pg = Grid::padded(dim, m);
        (0..g.len())
            .filter(|&f| !g.is_nyquist(f))
            .map(|f| (f as u32, pg.flat_of_mode(&g.mode(f)) as u32))
            .collect()
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Weight {
    Decay,
    Sobolev,
}

/// `(kind, dim, n, exponent bits)`.
type WeightKey = (Weight, usize, usize, u64);

fn weights(kind: Weight, dim: usize, n: usize, p: f64) -> Arc<Vec<f64>> {
    const MAX_ENTRIES: usize = 64;
    static CACHE: OnceLock<Cache<WeightKey, Vec<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (kind, dim, n, p.to_bits());
    if let Some(hit) = cache.lock().expect("table cache poisoned").get(&key) {
        return hit.clone();
    }
    let ksq = &grid_tables(dim, n).ksq;
    let w: Vec<f64> = match kind {
        Weight::Decay => ksq.iter().map(|k2| (-k2 * p).exp()).collect(),
        Weight::Sobolev => ksq.iter().map(|k2| (1.0 + k2).powf(p)).collect(),
    };
    let w = Arc::new(w);
    let mut map = cache.lock().expect("table cache poisoned");
    if map.len() >= MAX_ENTRIES {
        map.clear();
    }
    map.insert(key, w.clone());
    w
}

/// Multipliers `e^{-|k|^2 s}` of the heat semigroup at diffusion time `s`.
pub(crate) fn decay(dim: usize, n: usize, s: f64) -> Arc<Vec<f64>> {
    weights(Weight::Decay, dim, n, s)
}

/// Weights `(1 + |k|^2)^r` of the squared `H^r` norm.
pub(crate) fn sobolev(dim: usize, n: usize, r: f64) -> Arc<Vec<f64>> {
    weights(Weight::Sobolev, dim, n, r)
}

/// Whether each mode has every `|k_j| <= cutoff`.
pub(crate) fn retained(dim: usize, n: usize, cutoff: i64) -> Arc<Vec<bool>> {
    static CACHE: OnceLock<Cache<(usize, usize, i64), Vec<bool>>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), (dim, n, cutoff), || {
        grid_tables(dim, n)
            .k
            .iter()
            .map(|k| k[..dim].iter().all(|x| x.abs() <= cutoff as f64))
            .collect()
    })
}
