//! Molecular dynamics of a 2-D truncated Lennard-Jones fluid on a periodic
//! square, with Störmer-Verlet integration, Langevin sampling of canonical
//! initial conditions, and an experiment harness that compares ensemble
//! displacement statistics across step sizes.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod sampler;

pub use error::{Error, Result};
