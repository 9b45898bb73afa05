//! Pseudospectral simulation and verification toolkit for stochastic nematic
//! liquid-crystal flow on the periodic torus `[-pi, pi]^d`, `d in {2, 3}`.

// `!(x > y)` rejects NaN along with out-of-range values; index loops mirror the component formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod integrators;
pub mod io;
pub mod noise;
pub mod nonlinear;
pub mod record;
pub mod runner;
pub mod spectral;

pub use error::{NspdError, Result, Violation};
