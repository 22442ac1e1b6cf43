//! Monte Carlo simulation and statistical analysis of a CHSH test in which
//! one photon of a polarization-entangled pair is amplified by a classical
//! measure-and-prepare machine and then read out by threshold detectors with
//! postselection.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs and an explicitly passed RNG stream; file formats,
//! configuration, parallel drivers and the observer service live in the
//! `bellamp` companion crate.
//!
//! Pipeline per trial:
//!
//! 1. [`polarization::PairSource`] fixes the pair correlations.
//! 2. [`cloner::attempt_amplification`] projects photon B on a random linear
//!    polarization and, on a click, emits a macroscopic pulse.
//! 3. [`detection`] splits the pulse on the B basis and classifies the two
//!    intensities as `+`, `-` or inconclusive.
//! 4. [`experiment`] schedules bases and accumulates coincidences.
//! 5. [`analysis`] turns coincidence tables into correlation terms, the CHSH
//!    parameter, visibilities and entanglement witnesses.
#![no_std]
extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod cloner;
pub mod detection;
mod error;
pub mod experiment;
pub mod polarization;
pub mod rng;
pub mod sweep;
pub mod theory;

pub use error::{Error, Result};
