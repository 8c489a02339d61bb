//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "wavelength {wavelength_um} um outside valid range [{min_um}, {max_um}] um of model '{model}'"
    )]
    WavelengthOutOfRange {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
        model: String,
    },

    #[error("unknown polarization axis '{axis}' in model '{model}'")]
    UnknownAxis { axis: String, model: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The phase mismatch vanishes at the interaction centre, so no
    /// quasi-phase-matching grating is needed (and no finite period exists).
    #[error("phase mismatch vanishes at the interaction centre; no poling period required")]
    NoPolingRequired,

    #[error("frequency grid mismatch: {0}")]
    GridMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed or inconsistent external data (files, streams).
    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
