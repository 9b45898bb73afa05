use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{NspdError, Result};
use crate::fields::taylor_green;
use crate::nonlinear::{convective_b, director_convection_btilde, ericksen_stress_m, ginzburg_term};
use crate::spectral::{
    heat_flow, hs_norm, leray_project, lift, multiply, random_field, to_spectral, Grid,
    PhysicalField, Semigroup, SpectralField,
};

/// Left- and right-hand side of one inequality evaluated on one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl EstimateSides {
    /// `lhs / rhs`, or `None` when the right side vanishes.
    pub fn ratio(&self) -> Option<f64> {
        (self.rhs != 0.0).then(|| self.lhs / self.rhs)
    }
}

/// Sup norm sampled on a grid of twice the resolution.
pub fn sup_norm(f: &SpectralField) -> f64 {
    lift(f, 2 * f.grid().n()).sup_norm()
}

/// `||B(u, v)||_{a-1}` against `||u||_inf ||v||_a + ||u||_{a-1} ||v||_{a+1}^delta ||v||_a^{1-delta}`.
pub fn estimate_first(u: &SpectralField, v: &SpectralField, alpha: f64, delta: f64) -> Result<EstimateSides> {
    let lhs = hs_norm(&convective_b(u, v)?, alpha - 1.0);
    let va = hs_norm(v, alpha);
    let rhs = sup_norm(u) * va
        + hs_norm(u, alpha - 1.0) * hs_norm(v, alpha + 1.0).powf(delta) * va.powf(1.0 - delta);
    Ok(EstimateSides { lhs, rhs })
}

/// `||B~(v, d)||_a` against `||v||_a ||d||_{a+1}`.
pub fn estimate_second(v: &SpectralField, d: &SpectralField, alpha: f64) -> Result<EstimateSides> {
    Ok(EstimateSides {
        lhs: hs_norm(&director_convection_btilde(v, d)?, alpha),
        rhs: hs_norm(v, alpha) * hs_norm(d, alpha + 1.0),
    })
}

/// `||M(d, m)||_{a-1}` against `||d||_{a+1} ||m||_{a+1}`.
pub fn estimate_third(d: &SpectralField, m: &SpectralField, alpha: f64) -> Result<EstimateSides> {
    Ok(EstimateSides {
        lhs: hs_norm(&ericksen_stress_m(d, m)?, alpha - 1.0),
        rhs: hs_norm(d, alpha + 1.0) * hs_norm(m, alpha + 1.0),
    })
}

/// `|| |grad d|^2 d - |grad m|^2 m ||_a` against
/// `||d - m||_{a+1} (||d||_{a+1} + ||m||_{a+1}) ||d||_a + ||m||^2_{a+1} ||d - m||_a`.
pub fn estimate_fourth(d: &SpectralField, m: &SpectralField, alpha: f64) -> Result<EstimateSides> {
    let lhs = hs_norm(&(&ginzburg_term(d)? - &ginzburg_term(m)?), alpha);
    let diff = d - m;
    let (d1, m1) = (hs_norm(d, alpha + 1.0), hs_norm(m, alpha + 1.0));
    let rhs = hs_norm(&diff, alpha + 1.0) * (d1 + m1) * hs_norm(d, alpha) + m1 * m1 * hs_norm(&diff, alpha);
    Ok(EstimateSides { lhs, rhs })
}

/// `||f g||_s` against `||f||_inf ||g||_s + ||f||_s ||g||_inf` for scalar `f`, `g`.
pub fn estimate_product(f: &SpectralField, g: &SpectralField, s: f64) -> Result<EstimateSides> {
    if f.components() != 1 || g.components() != 1 {
        return Err(NspdError::Shape("product estimate takes scalar fields".into()));
    }
    Ok(EstimateSides {
        lhs: hs_norm(&multiply(f, g), s),
        rhs: sup_norm(f) * hs_norm(g, s) + hs_norm(f, s) * sup_norm(g),
    })
}

/// `||S(t) f||_{s+2r}` against `(1 + t^{-r}) ||f||_s`.
pub fn estimate_semigroup(
    f: &SpectralField,
    t: f64,
    s: f64,
    r: f64,
    which: Semigroup,
) -> Result<EstimateSides> {
    Ok(EstimateSides {
        lhs: hs_norm(&heat_flow(f, t, 1.0, which)?, s + 2.0 * r),
        rhs: (1.0 + t.powf(-r)) * hs_norm(f, s),
    })
}

/// Largest observed ratio of one estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioEntry {
    pub name: &'static str,
    pub max_ratio: f64,
    pub used: usize,
    pub skipped: usize,
    pub all_finite: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioSuite {
    pub alpha: f64,
    pub delta: f64,
    pub seed: u64,
    pub entries: Vec<RatioEntry>,
    /// Largest relative change of any ratio under rescaling of its inputs.
    pub homogeneity_defect: f64,
}

impl RatioSuite {
    pub fn entry(&self, name: &str) -> Option<&RatioEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn all_finite(&self) -> bool {
        self.entries.iter().all(|e| e.all_finite && e.max_ratio.is_finite())
    }

    /// Largest factor between matching max ratios of two suites.
    pub fn max_spread(&self, other: &RatioSuite) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| {
                let (x, y) = (a.max_ratio, b.max_ratio);
                if x == 0.0 && y == 0.0 {
                    1.0
                } else {
                    x.max(y) / x.min(y)
                }
            })
            .fold(1.0, f64::max)
    }
}

pub const ESTIMATE_NAMES: [&str; 7] = [
    "first",
    "second",
    "third",
    "fourth",
    "product",
    "semigroup_stokes",
    "semigroup_heat",
];

/// The default `delta`: half the margin `alpha - d/2`, capped at `1/2`.
pub fn default_delta(alpha: f64, dim: usize) -> f64 {
    ((alpha - dim as f64 / 2.0) / 2.0).clamp(0.0, 0.5)
}

struct Draw<'a> {
    grid: Grid,
    band: i64,
    rng: &'a mut ChaCha8Rng,
}

impl Draw<'_> {
    fn field(&mut self, comps: usize) -> SpectralField {
        let decay = self.rng.random_range(0.5..3.0);
        let amp = 10f64.powf(self.rng.random_range(-1.0..1.0));
        random_field(self.grid, comps, self.band, decay, self.rng).scaled(amp)
    }

    fn solenoidal(&mut self) -> SpectralField {
        let f = self.field(self.grid.dim());
        leray_project(&f).expect("velocity has dim components")
    }
}

fn rel_change(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) if x != 0.0 => ((x - y) / x).abs(),
        (Some(_), Some(y)) => y.abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Max over `n_samples` random band-limited fields of each estimate's ratio.
///
/// The second estimate also includes the probe `v` = Taylor-Green, `d = (cos x1, sin x1, 0)`.
/// Samples with vanishing right side are skipped. The first few samples are re-evaluated
/// with rescaled inputs to measure the homogeneity defect.
pub fn lemma_ratio_suite(grid: Grid, n_samples: usize, alpha: f64, seed: u64) -> Result<RatioSuite> {
    if n_samples == 0 {
        return Err(NspdError::Domain("ratio suite needs at least one sample".into()));
    }
    let dim = grid.dim();
    if !(alpha > dim as f64 / 2.0) {
        return Err(NspdError::Domain(format!(
            "alpha must exceed dim/2 = {}, got {alpha}",
            dim as f64 / 2.0
        )));
    }
    let delta = default_delta(alpha, dim);
    // cubic terms of band-limited inputs stay inside the dealiased band
    let band = ((grid.n() / 10) as i64).max(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc: Vec<RatioEntry> = ESTIMATE_NAMES
        .iter()
        .map(|name| RatioEntry {
            name,
            max_ratio: 0.0,
            used: 0,
            skipped: 0,
            all_finite: true,
        })
        .collect();
    let mut push = |i: usize, s: EstimateSides| {
        let e = &mut acc[i];
        match s.ratio() {
            None => e.skipped += 1,
            Some(r) => {
                e.used += 1;
                e.all_finite &= r.is_finite();
                e.max_ratio = e.max_ratio.max(r);
            }
        }
    };

    let probe_d = to_spectral(&PhysicalField::from_fn(grid, 3, |x, o| {
        o.copy_from_slice(&[x[0].cos(), x[0].sin(), 0.0])
    }));
    push(1, estimate_second(&taylor_green(grid), &probe_d, alpha)?);

    let mut defect: f64 = 0.0;
    let checked = n_samples.min(5);
    for sample in 0..n_samples {
        let mut draw = Draw {
            grid,
            band,
            rng: &mut rng,
        };
        let u = draw.solenoidal();
        let v = draw.solenoidal();
        let d = draw.field(3);
        let m = draw.field(3);
        let f = draw.field(1);
        let g = draw.field(1);
        let t = 10f64.powf(rng.random_range(-4.0..0.0));

        let sides = [
            estimate_first(&u, &v, alpha, delta)?,
            estimate_second(&v, &d, alpha)?,
            estimate_third(&d, &m, alpha)?,
            estimate_fourth(&d, &m, alpha)?,
            estimate_product(&f, &g, alpha)?,
            estimate_semigroup(&v, t, alpha - 1.0, 1.0, Semigroup::Stokes)?,
            estimate_semigroup(&d, t, alpha, 1.0, Semigroup::Heat)?,
        ];
        for (i, s) in sides.into_iter().enumerate() {
            push(i, s);
        }

        if sample < checked {
            let (a, b) = (2.0, 3.0);
            let scaled = [
                estimate_first(&u.scaled(a), &v.scaled(b), alpha, delta)?,
                estimate_second(&v.scaled(a), &d.scaled(b), alpha)?,
                estimate_third(&d.scaled(a), &m.scaled(b), alpha)?,
                estimate_fourth(&d.scaled(a), &m.scaled(a), alpha)?,
                estimate_product(&f.scaled(a), &g.scaled(b), alpha)?,
                estimate_semigroup(&v.scaled(a), t, alpha - 1.0, 1.0, Semigroup::Stokes)?,
                estimate_semigroup(&d.scaled(b), t, alpha, 1.0, Semigroup::Heat)?,
            ];
            for (s0, s1) in sides.iter().zip(&scaled) {
                defect = defect.max(rel_change(s0.ratio(), s1.ratio()));
            }
        }
    }
    Ok(RatioSuite {
        alpha,
        delta,
        seed,
        entries: acc,
        homogeneity_defect: defect,
    })
}
