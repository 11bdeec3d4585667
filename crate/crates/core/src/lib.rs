//! Constrained Hamiltonian dynamics without the standard library.
//!
//! The crate covers the finite-dimensional Dirac constraint machinery
//! (brackets, consistency chains, first/second-class classification, Dirac
//! brackets, gauge-fixed multipliers, constraint-error projection), principal
//! symbol analysis, and vacuum electrodynamics on a periodic spectral grid in
//! both the canonical and the Coulomb-gauge-fixed formulation.
//!
//! Everything here is pure computation over `alloc` containers. Fourier
//! transforms go through the [`spectral::FftBackend`] trait; a direct DFT
//! backend ships with the crate and faster backends can be plugged in by the
//! caller.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod constraint;
mod error;
pub mod evolution;
mod linalg;
pub mod maxwell;
pub mod phase;
pub mod spectral;
pub mod symbol;
pub mod toys;

pub use error::{Error, Result};
