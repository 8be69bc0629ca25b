//! Continuous mod-p cohomology of compact p-adic analytic groups through
//! fusion-stable Lyndon–Hochschild–Serre spectral sequences.

pub mod budget;
pub mod cyclic_cohomology;
pub mod error;
pub mod exterior_algebra;
pub mod fp_linalg;
pub mod fusion_actions;
pub mod padic_groups;
pub mod ring_presentations;
pub mod scenario;
pub mod spectral_engine;

pub use error::{Error, Result};
