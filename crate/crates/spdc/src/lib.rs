//! Type-I spontaneous parametric down-conversion pumped by Bessel-Gauss
//! beams in a uniaxial crystal: angular spectra, conditional angular
//! spectra, and orbital-angular-momentum-resolved transition amplitudes.
//!
//! The crate computes the signal-photon angular spectrum (AS) and the
//! idler-conditioned angular spectrum (CAS) both by full k-space quadrature
//! over the pump annulus and by closed-form approximations, cross-validated
//! against each other, and evaluates two-photon transition amplitudes onto
//! tilted Bessel detection modes resolved by OAM index.
//!
//! Everything is deterministic: fixed tensor-product quadratures with
//! compensated summation, and a data-parallel cell map whose output is
//! independent of the worker count. Units are um / 1/um / radians
//! throughout, with vacuum wavelengths entering configuration in nm.
//!
//! Entry points:
//! - [`crystal`]: material model, dispersion relations, polarization vectors.
//! - [`phasematch`]: longitudinal mismatch, envelopes, the pump spectrum.
//! - [`spectra`]: AS / CAS maps and the emission-cone geometry.
//! - [`oam`]: tilted Bessel modes and OAM amplitude matrices.
//! - [`config`] / [`formats`] / [`cli`]: run configuration, file formats and
//!   the `spdc` command-line front end.
//!
//! The runnable examples under `examples/` exercise one capability each; see
//! the README for a map.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod crystal;
pub mod error;
pub mod formats;
pub mod grid;
pub mod oam;
pub mod phasematch;
pub mod quad;
pub mod spectra;
pub mod validate;

pub use crystal::{
    chi_contraction, derived_indices, extraordinary_kz, ordinary_kz, polarization_vector,
    ChiMode, CrystalConfig, DerivedIndices, Polarization, PumpBeam, Sellmeier,
};
pub use error::{Result, SpdcError};
pub use grid::SpectrumGrid;
pub use phasematch::{
    delta_kz_exact, pm_envelope, pump_spectrum, taylor_mismatch, Envelope, MismatchExpansion,
    PhaseMatchSpec,
};
pub use quad::{integrate_annulus, integrate_periodic, parallel_cell_map, QuadratureSpec};
pub use spectra::{
    as_analytic, as_numeric, cas_analytic, cas_numeric, cone_geometry, find_max, pi_residual,
    CasClosedForm, ConeGeometry, SpectrumMap,
};
pub use oam::{
    amplitude_matrix, angular_factor, marginals, tilted_dispersion, tilted_frame,
    transition_amplitude, AmplitudeSettings, DispersionBranch, OamAmplitudeMatrix,
    TiltedBesselMode, TiltedDispersion, TiltedFrame,
};

