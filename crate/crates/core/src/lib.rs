//! Energy partition between Joule heating and electromagnetic radiation when a
//! load capacitor switches, and a synthetic EM side-channel pipeline built on it.
//!
//! * [`circuit`]: element values, validation and derived parameters.
//! * [`transient`]: closed-form and RK4 waveforms.
//! * [`energy`]: heat / radiation integrals, closed forms, resistance and ramp-time sweeps.
//! * [`tracegen`]: Hamming-weight EM trace synthesis, spatial grids, binary trace files.
//! * [`attack`]: correlation key recovery, SNR and minimum traces to disclosure.

pub mod attack;
pub mod circuit;
pub mod energy;
pub mod error;
pub mod tracegen;
pub mod transient;

pub use error::{Error, Result, ValidationError};
