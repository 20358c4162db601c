//! Semiclassical WKB toolkit for weakly nonlinear Bloch waves.
//!
//! The pieces, bottom up: [`lattice`] (periodic potentials and physical
//! scaling), [`bloch`] (band structure, gauge, corrector), [`rays`]
//! (characteristics and transport), [`wkb`] (assembly of the approximate
//! solution), [`nls`] (split-step reference solver) and [`harness`]
//! (error norms, sweeps, Wigner transforms, configuration, CLI).

pub mod bloch;
pub mod coupling;
pub mod error;
pub mod field;
pub mod fourier;
pub mod harness;
pub mod lattice;
pub mod nls;
pub mod rays;
pub mod wkb;

pub use coupling::Coupling;
pub use error::{Error, Result};

