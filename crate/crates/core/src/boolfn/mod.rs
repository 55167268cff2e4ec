//! Boolean functions on the hypercube and their exact Fourier analysis.
//!
//! Tables live on `{0,1}^n`; spectra are taken of the ±1 form obtained by
//! `x_i = 1 - 2 z_i`, so output `0` maps to `+1` and output `1` maps to `-1`.

mod spectrum;
mod table;

use thiserror::Error;

pub use spectrum::{
    fourier_degree, fwht, inverse_fwht, noise_stability, profile, Dyadic, FourierSpectrum, SpectralProfile,
};
pub use table::{TruthTable, MAX_VARS};

#[derive(Debug, Error, PartialEq)]
pub enum BoolFnError {
    #[error("variable count {0} outside 1..={max}", max = MAX_VARS)]
    VarCount(usize),
    #[error("variable index {var} outside 1..={n}")]
    VarIndex { var: usize, n: usize },
    #[error("expected {expected} entries, found {found}")]
    Length { expected: usize, found: usize },
    #[error("not a Boolean spectrum: reconstructed value at index {index} is not ±1")]
    NotBoolean { index: usize },
    #[error("noise rate {0} outside [0, 1]")]
    Rho(f64),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl BoolFnError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse { line, msg: msg.into() }
    }
}
