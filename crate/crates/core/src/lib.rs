//! Clifford families, centriole chains and energy flows on the rotation groups.
//!
//! The crate builds exact (signed-permutation) matrix models of irreducible
//! Clifford modules, the associated Hopf maps and iterated centrioles in
//! `SO(p)`, spectral invariants of pole-to-pole geodesics, and a discrete
//! curve-shortening engine that deforms sampled sphere maps into affine Hopf
//! form. On top of that it derives clutching-triple invariants for bundles
//! over spheres and the 8-periodic restriction/cokernel tables of Clifford
//! module Grothendieck groups.

pub mod bundle;
pub mod centriole;
pub mod clifford;
pub mod config;
pub mod error;
pub mod flow;
pub mod hopf;
pub mod index;
pub mod ktheory;
pub mod linalg;
pub mod selftest;
pub mod snf;

pub use config::RunConfig;
pub use error::{Error, Result};

/// Default tolerance for exact (signed-permutation) matrix predicates.
pub const DEFAULT_TOL: f64 = 1e-10;
