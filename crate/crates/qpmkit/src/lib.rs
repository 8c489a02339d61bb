//! Design and analysis toolkit for quasi-phase-matched photon-pair sources.
//!
//! The crate covers the full workflow of a domain-engineered parametric
//! down-conversion source:
//!
//! - [`dispersion`]: Sellmeier dispersion models, phase mismatch and
//!   group-velocity diagnostics, nominal poling periods.
//! - [`domain`]: periodically poled and Gaussian-apodized crystal domain
//!   configurations built by greedy target tracking.
//! - [`spectral`]: phase-matching functions, pump envelopes, joint spectral
//!   amplitudes and spectral filters.
//! - [`analysis`]: Schmidt decomposition, heralded-photon purity, two-source
//!   interference visibility and parameter sweeps.
//! - [`counting`]: Klyshko heralding, collection efficiency, squeezing
//!   parameter estimation and visibility-versus-power fits.
//! - [`jsi`]: dispersive time-of-flight reconstruction of joint spectral
//!   intensities from time-tagged detection events, including a synthetic
//!   event generator.
//!
//! All quantities use SI units unless a name says otherwise: angular
//! frequencies in rad/s, wavevectors in rad/m, lengths in metres.

pub mod analysis;
pub mod constants;
pub mod counting;
pub mod dispersion;
pub mod domain;
pub mod error;
pub mod jsi;
pub mod spectral;

pub use error::{Error, Result};
