//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpdcError {
    #[error("wavelength {0} um outside supported window [{1}, {2}] um")]
    WavelengthOutOfRange(f64, f64, f64),

    #[error("evanescent wave: transverse wave number {kperp} 1/um exceeds shell radius {shell} 1/um")]
    Evanescent { kperp: f64, shell: f64 },

    #[error("degenerate polarization vector: wave vector is parallel to the optical axis")]
    DegeneratePolarization,

    #[error("no real emission cone: n_eff = {neff} >= n_o = {no} (positive uniaxial configuration)")]
    NoRealCone { neff: f64, no: f64 },

    #[error("invalid {what}: {why}")]
    InvalidInput { what: &'static str, why: String },

    #[error("non-finite integrand sample at {abscissa}")]
    NonFiniteSample { abscissa: String },

    #[error("grid is identically zero; no maximum")]
    EmptyGrid,

    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("malformed {format} file: {msg}")]
    BadFormat { format: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpdcError>;

impl SpdcError {
    pub fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        SpdcError::InvalidInput {
            what,
            why: why.into(),
        }
    }
}
