//! Free-electron spectral shearing interferometry (FESSI).
//!
//! The crate simulates the full measurement chain for an ultrafast electron
//! wavepacket: a spectral wavefunction is split into two replicas, one replica
//! is energy-sheared by a light-electron modulator (LEM) and delayed by a Wien
//! filter, and the recombined beam is recorded by a spectrometer. The spectral
//! phase is then recovered from the interferogram by Fourier filtering,
//! calibration and concatenation.
//!
//! Units throughout: energies in eV, times in fs, lengths in nm, phases in
//! rad. Spectral phase coefficients are given in rad·eV⁻ⁿ.
//!
//! Module map:
//! - [`wavepacket`]: energy/time representations, Fourier pair, moments
//! - [`lem`], [`bessel`], [`tdse`]: the light-electron modulator
//! - [`interferometer`]: delay, interference, jittered measurement, constraints
//! - [`reconstruction`]: a.c. extraction, calibration, concatenation, fidelity
//! - [`analysis`]: pulse-duration formulas, locality criterion, diagrams
//! - [`scenario`]: configuration schema, presets, end-to-end runs and sweeps
//! - [`textio`]: columnar text formats

pub mod analysis;
pub mod bessel;
pub mod constants;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod interferometer;
pub mod interp;
pub mod lem;
pub mod reconstruction;
pub mod scenario;
pub mod tdse;
pub mod textio;
pub mod wavepacket;

pub use error::{Error, Result};
pub use grid::{EnergyGrid, TimeGrid};
pub use wavepacket::{SpectralPhaseSpec, SpectralWavefunction, TemporalWavefunction};
