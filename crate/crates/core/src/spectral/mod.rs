//! Fourier representation of periodic fields and the linear operators acting on them.

mod fft;
mod field;
mod grid;
mod ops;
pub(crate) mod products;
mod random;
mod tables;

pub use field::{to_physical, to_spectral, PhysicalField, SpectralField};
#[allow(unused_imports)]
pub(crate) use field::{lift, padded_size, restrict};
pub use grid::{Grid, DEFAULT_DEALIAS_FRACTION};
pub use ops::{
    dealias, divergence, divergence_ratio, gradient, laplacian, leray_project, partial,
    semigroup_apply, sobolev_norm, FractionalExponent, Semigroup,
};
pub(crate) use ops::{heat_flow, hs_norm, hs_norm_sq};
pub use products::multiply;
pub use random::random_field;
