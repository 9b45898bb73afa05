//! Post-processing of states and records: constraint energies, regularized functionals,
//! identity residuals, estimate ratios and lifespan statistics.

mod constraint;
mod identities;
mod lifespan;
mod psi;
mod ratios;

pub use constraint::{constraint_from_physical, constraint_report, ConstraintReport};
pub use identities::{vector_identity_checks, IdentityResiduals};
pub use lifespan::{
    blowup_monitor, gronwall_check, lifespan_statistics, wilson_interval, GronwallReport,
    LifespanSample, LifespanStatus, SurvivalCurve, SurvivalReport, WILSON_Z,
};
pub use psi::{mollifier, psi_ell, psi_sample, psi_sweep, PsiSample};
pub use ratios::{
    default_delta, estimate_first, estimate_fourth, estimate_product, estimate_second,
    estimate_semigroup, estimate_third, lemma_ratio_suite, sup_norm, EstimateSides, RatioEntry,
    RatioSuite, ESTIMATE_NAMES,
};
