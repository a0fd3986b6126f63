//! Cavity-enhanced SPDC source modelling: dispersion, racetrack circuit
//! response, resonance fitting, joint spectral amplitudes and Schmidt-space
//! metrics.

pub mod circuit;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod metrics;
pub mod pipeline;
pub mod resonances;
pub mod spdc;
pub mod units;

pub use error::{Error, Result};
