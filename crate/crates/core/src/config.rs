//! Experiment configuration: a flat, sectioned TOML document with defaults for
//! every key.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{NspdError, Result, Violation};
use crate::spectral::{Grid, DEFAULT_DEALIAS_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct SolverConfig {
    pub grid: GridConfig,
    pub model: ModelConfig,
    pub scheme: SchemeSpec,
    pub noise: NoiseConfig,
    pub magnetic: MagneticFieldConfig,
    pub initial: InitialData,
    pub stopping: StoppingRule,
    pub output: OutputConfig,
    pub ensemble: EnsembleConfig,
    pub convergence: ConvergenceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Points per axis, a power of two >= 8.
    pub n: usize,
    /// Retained fraction of the half band for nonlinear products; 1 disables truncation.
    pub dealias_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n: 64,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
        }
    }
}

/// Which cross product realizes the director noise coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CrossConvention {
    /// `G(d) = d x h`.
    #[default]
    DCrossH,
    /// `G(d) = h x d`.
    HCrossD,
}

impl CrossConvention {
    /// Sign `s` with `G(d) = s (d x h)`.
    pub fn sign(self) -> f64 {
        match self {
            CrossConvention::DCrossH => 1.0,
            CrossConvention::HCrossD => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Regularity index of the state spaces; must exceed dim/2.
    pub alpha: f64,
    /// Coupling of the elastic stress into the momentum balance.
    pub lambda: f64,
    /// Director relaxation rate (scales both the Laplacian and `|grad d|^2 d`).
    pub gamma: f64,
    pub cross_convention: CrossConvention,
    /// Drop every nonlinear drift term, leaving the linear Stokes/heat flows plus noise.
    pub linearized: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            lambda: 1.0,
            gamma: 1.0,
            cross_convention: CrossConvention::DCrossH,
            linearized: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SchemeVariant {
    /// Exact pointwise rotation for the transport noise.
    #[default]
    StratonovichRotation,
    /// Euler-Maruyama increment plus the explicit correction drift.
    ItoPlusCorrection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSpec {
    pub variant: SchemeVariant,
    pub renormalize_director: bool,
    /// Time step (time units).
    pub dt: f64,
    /// Horizon (time units).
    pub t_max: f64,
    /// Sign multiplying the Ito correction drift; `-1` is a deliberately wrong scheme
    /// used to check that the consistency suite can fail.
    pub ito_correction_sign: f64,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self {
            variant: SchemeVariant::StratonovichRotation,
            renormalize_director: false,
            dt: 1e-3,
            t_max: 1.0,
            ito_correction_sign: 1.0,
        }
    }
}

impl SchemeSpec {
    /// Number of steps covering `[0, t_max]`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Number of divergence-free basis fields driven by the velocity noise.
    pub n_modes: usize,
    /// Velocity noise amplitude.
    pub sigma: f64,
    /// Spectral decay exponent of the noise covariance; must exceed `alpha + dim/2`.
    pub decay_s: f64,
    /// Gain of the saturating velocity-dependent factor (0 gives additive noise).
    pub multiplicative_gain: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            n_modes: 8,
            sigma: 0.1,
            decay_s: 4.0,
            multiplicative_gain: 0.0,
            seed: 0,
        }
    }
}

/// `h(x) = sum_j a_j cos(k_j . x)`; wavevectors shorter than `dim` are padded with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MagneticFieldConfig {
    pub wavevectors: Vec<Vec<i64>>,
    pub amplitudes: Vec<[f64; 3]>,
}

impl Default for MagneticFieldConfig {
    fn default() -> Self {
        Self {
            wavevectors: vec![vec![0]],
            amplitudes: vec![[1.0, 0.0, 0.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    /// Amplitude of the Taylor-Green velocity.
    pub taylor_green_amplitude: f64,
    /// Amplitude of the smooth perturbation added to `e_3` before normalization.
    pub director_perturbation: f64,
    /// Pointwise modulus of the initial director.
    pub director_modulus: f64,
}

impl Default for InitialData {
    fn default() -> Self {
        Self {
            taylor_green_amplitude: 0.5,
            director_perturbation: 0.2,
            director_modulus: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StoppingRule {
    /// Strictly increasing levels of the V_alpha norm.
    pub thresholds: Vec<f64>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            thresholds: vec![1e3, 1e4, 1e5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// Write a field snapshot every this many steps; 0 disables snapshots.
    pub snapshots_every: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            snapshots_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    /// Initial-data amplitudes `R` assigned to trajectories round-robin by id;
    /// each scales the Taylor-Green amplitude and the director perturbation.
    /// Empty means every trajectory uses `R = 1`.
    pub amplitudes: Vec<f64>,
    /// Number of points of the survival-curve time grid on `[0, t_max]`.
    pub survival_points: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_traj: 16,
            amplitudes: Vec::new(),
            survival_points: 21,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceProblem {
    /// Linearized dynamics with additive velocity noise; strong error of the state.
    #[default]
    LinearAdditive,
    /// Full nonlinear dynamics with all noise switched off.
    Deterministic,
    /// Sphere-constraint drift with renormalization off.
    ConstraintDrift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub problem: ConvergenceProblem,
    /// Halving sequence of time steps, coarsest first.
    pub dt_list: Vec<f64>,
    /// Independent Brownian paths averaged per step size.
    pub n_paths: usize,
    /// Reference run step is `min(dt_list) / reference_factor` (a power of two).
    pub reference_factor: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            problem: ConvergenceProblem::LinearAdditive,
            dt_list: vec![4e-3, 2e-3, 1e-3, 5e-4],
            n_paths: 8,
            reference_factor: 8,
        }
    }
}


/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<SolverConfig> {
    let cfg: SolverConfig = toml::from_str(text).map_err(|e| NspdError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn violation(field: &str, constraint: impl Into<String>, value: impl std::fmt::Display) -> Violation {
    Violation {
        field: field.into(),
        constraint: constraint.into(),
        value: value.to_string(),
    }
}

impl SolverConfig {
    /// Canonical TOML text; parsing it yields an identical config.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The collocation grid; assumes the grid section is valid.
    pub fn build_grid(&self) -> Result<Grid> {
        let f = self.grid.dealias_fraction;
        Grid::with_dealias(self.grid.dim, self.grid.n, if f >= 1.0 { None } else { Some(f) })
    }

    /// Check every constraint and report all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        let dim = self.grid.dim;
        let n = self.grid.n;
        let dimf = dim as f64;
        if dim != 2 && dim != 3 {
            v.push(violation("grid.dim", "dim must be 2 or 3", dim));
        }
        if n < 8 || !n.is_power_of_two() {
            v.push(violation("grid.n", "points per axis must be a power of two >= 8", n));
        }
        let f = self.grid.dealias_fraction;
        if !(f > 0.0 && f <= 1.0) {
            v.push(violation("grid.dealias_fraction", "must lie in (0, 1]", f));
        }

        let alpha = self.model.alpha;
        if !(alpha.is_finite() && alpha > dimf / 2.0) {
            v.push(violation(
                "model.alpha",
                format!("alpha must exceed dim/2 = {}", dimf / 2.0),
                alpha,
            ));
        }
        for (name, x) in [("model.lambda", self.model.lambda), ("model.gamma", self.model.gamma)] {
            if !x.is_finite() {
                v.push(violation(name, "must be finite", x));
            }
        }
        if !(self.model.gamma > 0.0) {
            v.push(violation("model.gamma", "must be positive", self.model.gamma));
        }

        let s = &self.scheme;
        if !(s.dt > 0.0 && s.dt.is_finite()) {
            v.push(violation("scheme.dt", "must be positive and finite", s.dt));
        }
        if !(s.t_max > 0.0 && s.t_max.is_finite()) {
            v.push(violation("scheme.t_max", "must be positive and finite", s.t_max));
        }
        if s.dt > s.t_max {
            v.push(violation("scheme.dt", format!("must not exceed t_max = {}", s.t_max), s.dt));
        }
        if s.ito_correction_sign != 1.0 && s.ito_correction_sign != -1.0 {
            v.push(violation("scheme.ito_correction_sign", "must be 1 or -1", s.ito_correction_sign));
        }
        if dim == 2 || dim == 3 {
            let cutoff = if f < 1.0 {
                (f * n as f64 / 2.0 + 1e-12).floor()
            } else {
                n as f64 / 2.0
            };
            let stiff = s.dt * self.model.gamma.max(1.0) * dimf * cutoff * cutoff;
            if stiff > 50.0 {
                v.push(violation(
                    "scheme.dt",
                    "dt * |k_max|^2 must not exceed 50",
                    format!("{} (dt * |k_max|^2 = {stiff})", s.dt),
                ));
            }
        }

        let nz = &self.noise;
        if !(nz.sigma >= 0.0 && nz.sigma.is_finite()) {
            v.push(violation("noise.sigma", "must be finite and non-negative", nz.sigma));
        }
        if !(nz.multiplicative_gain >= 0.0 && nz.multiplicative_gain.is_finite()) {
            v.push(violation(
                "noise.multiplicative_gain",
                "must be finite and non-negative",
                nz.multiplicative_gain,
            ));
        }
        if !(nz.decay_s > alpha + dimf / 2.0) {
            v.push(violation(
                "noise.decay_s",
                format!("decay_s must exceed alpha + dim/2 = {}", alpha + dimf / 2.0),
                nz.decay_s,
            ));
        }
        if let Ok(grid) = self.build_grid() {
            let available = crate::noise::available_modes(&grid);
            if nz.n_modes > available {
                v.push(violation(
                    "noise.n_modes",
                    format!("must not exceed the {available} retained basis fields"),
                    nz.n_modes,
                ));
            }
        }

        let m = &self.magnetic;
        if m.wavevectors.len() != m.amplitudes.len() {
            v.push(violation(
                "magnetic.amplitudes",
                format!("needs one amplitude per wavevector ({})", m.wavevectors.len()),
                m.amplitudes.len(),
            ));
        }
        for k in &m.wavevectors {
            if k.len() > dim {
                v.push(violation("magnetic.wavevectors", format!("at most {dim} entries"), format!("{k:?}")));
            }
            if k.iter().any(|x| 2 * x.unsigned_abs() as usize >= n) {
                v.push(violation("magnetic.wavevectors", "entries must lie below n/2", format!("{k:?}")));
            }
        }
        if m.amplitudes.iter().flatten().any(|x| !x.is_finite()) {
            v.push(violation("magnetic.amplitudes", "must be finite", format!("{:?}", m.amplitudes)));
        }

        let i = &self.initial;
        for (name, x) in [
            ("initial.taylor_green_amplitude", i.taylor_green_amplitude),
            ("initial.director_perturbation", i.director_perturbation),
        ] {
            if !x.is_finite() {
                v.push(violation(name, "must be finite", x));
            }
        }
        if !(i.director_modulus > 0.0 && i.director_modulus.is_finite()) {
            v.push(violation("initial.director_modulus", "must be positive and finite", i.director_modulus));
        }

        let th = &self.stopping.thresholds;
        if th.is_empty() {
            v.push(violation("stopping.thresholds", "at least one threshold is required", "[]"));
        }
        if th.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            v.push(violation("stopping.thresholds", "must be positive and finite", format!("{th:?}")));
        }
        if th.windows(2).any(|w| !(w[0] < w[1])) {
            v.push(violation("stopping.thresholds", "must be strictly increasing", format!("{th:?}")));
        }

        if self.ensemble.n_traj == 0 {
            v.push(violation("ensemble.n_traj", "must be at least 1", 0));
        }
        if self.ensemble.amplitudes.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            v.push(violation(
                "ensemble.amplitudes",
                "must be finite and non-negative",
                format!("{:?}", self.ensemble.amplitudes),
            ));
        }
        if self.ensemble.survival_points < 2 {
            v.push(violation("ensemble.survival_points", "must be at least 2", self.ensemble.survival_points));
        }

        let c = &self.convergence;
        if let Err(e) = check_halving(&c.dt_list) {
            v.push(e);
        }
        if c.n_paths == 0 {
            v.push(violation("convergence.n_paths", "must be at least 1", 0));
        }
        if !c.reference_factor.is_power_of_two() {
            v.push(violation("convergence.reference_factor", "must be a power of two", c.reference_factor));
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(NspdError::Validation(v))
        }
    }
}

/// A step list must hold at least four entries, each half of its predecessor.
pub(crate) fn check_halving(dts: &[f64]) -> std::result::Result<(), Violation> {
    if dts.len() < 4 {
        return Err(violation("convergence.dt_list", "needs at least 4 entries", format!("{dts:?}")));
    }
    if dts.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
        return Err(violation("convergence.dt_list", "entries must be positive", format!("{dts:?}")));
    }
    for w in dts.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
            return Err(violation(
                "convergence.dt_list",
                "each entry must be half of the previous one",
                format!("{dts:?}"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config("[grid]\ndim = 2\n").unwrap();
        assert_eq!(cfg.model.alpha, 2.0);
        assert!((cfg.grid.dealias_fraction - 2.0 / 3.0).abs() < 1e-15);
        assert!(!cfg.scheme.renormalize_director);
    }

    #[test]
    fn alpha_below_half_dimension_is_named() {
        let err = parse_config("[grid]\ndim = 3\nn = 32\n[model]\nalpha = 1.0\n").unwrap_err();
        let NspdError::Validation(v) = err else {
            panic!("expected validation error, got {err}");
        };
        assert!(v.iter().any(|x| x.field == "model.alpha"
            && x.constraint == "alpha must exceed dim/2 = 1.5"));
    }

    #[test]
    fn round_trip_preserves_hash() {
        let mut cfg = SolverConfig::default();
        cfg.scheme.dt = 3.7e-4;
        cfg.stopping.thresholds = vec![0.1, 2.5, 1e7];
        cfg.magnetic.wavevectors = vec![vec![1, -2], vec![0]];
        cfg.magnetic.amplitudes = vec![[0.3, 0.0, 1.0 / 3.0], [0.0, 1.0, 0.0]];
        let again = parse_config(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn rejects_bad_thresholds_and_decay() {
        let err = parse_config("[stopping]\nthresholds = [2.0, 1.0]\n[noise]\ndecay_s = 2.5\n")
            .unwrap_err();
        let NspdError::Validation(v) = err else { panic!() };
        assert!(v.iter().any(|x| x.field == "stopping.thresholds"));
        assert!(v.iter().any(|x| x.field == "noise.decay_s"));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        assert!(matches!(parse_config("[grid]\nsize = 3\n"), Err(NspdError::Parse(_))));
    }
}
