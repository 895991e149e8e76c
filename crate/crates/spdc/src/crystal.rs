//! Material model of the uniaxial crystal and the pump field: refractive
//! indices, dispersion relations, polarization vectors and the chi(2)
//! contraction.
//!
//! All lengths are in um, wave numbers in 1/um, angles in radians. The only
//! non-internal unit is the vacuum wavelength, which enters configs in nm.
//! Frequencies are represented throughout by the vacuum wave number
//! k0 = 2*pi/lambda, which eliminates c from every formula.

use crate::error::{Result, SpdcError};

/// Supported vacuum-wavelength window for Sellmeier evaluation, in um.
pub const WAVELENGTH_WINDOW_UM: (f64, f64) = (0.3, 1.2);

/// Sellmeier model `n^2 = a + b / (lambda^2 - c) - d * lambda^2`, lambda in um.
///
/// The shipped BBO sets use the Kato (1986) coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sellmeier {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Sellmeier {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Sellmeier { a, b, c, d }
    }

    /// Dispersionless medium with constant n^2.
    pub const fn constant(n_squared: f64) -> Self {
        Sellmeier {
            a: n_squared,
            b: 0.0,
            c: 0.0,
            d: 0.0,
        }
    }

    /// Refractive index at `lambda_um`.
    pub fn index(&self, lambda_um: f64) -> Result<f64> {
        let (lo, hi) = WAVELENGTH_WINDOW_UM;
        if !(lambda_um >= lo && lambda_um <= hi) {
            return Err(SpdcError::WavelengthOutOfRange(lambda_um, lo, hi));
        }
        let l2 = lambda_um * lambda_um;
        let n2 = self.a + self.b / (l2 - self.c) - self.d * l2;
        if !(n2 > 1.0) {
            return Err(SpdcError::invalid(
                "sellmeier coefficients",
                format!("n^2 = {n2} <= 1 at lambda = {lambda_um} um"),
            ));
        }
        Ok(n2.sqrt())
    }
}

/// Kato (1986) ordinary-index Sellmeier set for beta barium borate.
pub const BBO_ORDINARY: Sellmeier = Sellmeier::new(2.7359, 0.01878, 0.01822, 0.01354);
/// Kato (1986) extraordinary-index Sellmeier set for beta barium borate.
pub const BBO_EXTRAORDINARY: Sellmeier = Sellmeier::new(2.3753, 0.01224, 0.01667, 0.01516);

/// Uniaxial medium: permittivity models, optical-axis orientation and length.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalConfig {
    pub sellmeier_o: Sellmeier,
    pub sellmeier_e: Sellmeier,
    /// Polar angle of the optical axis from the crystal normal (z), radians.
    pub axis_polar: f64,
    /// Azimuth of the optical axis about z, radians. `pi/2` puts the axis in
    /// the Y-Z plane as `a = (0, sin(theta_a), cos(theta_a))`.
    pub axis_azimuth: f64,
    /// Crystal length, um.
    pub length: f64,
    /// Scalar nonlinear coefficient d22, pm/V.
    pub d22: f64,
}

impl CrystalConfig {
    /// Reference BBO dataset used throughout the examples: theta_a = 29.3 deg,
    /// 1 mm length, d22 = 2.2 pm/V. The axis azimuth is -90 deg so that maps
    /// come out in the orientation of the published measurement coordinates.
    pub fn bbo_reference() -> Self {
        CrystalConfig {
            sellmeier_o: BBO_ORDINARY,
            sellmeier_e: BBO_EXTRAORDINARY,
            axis_polar: 29.3_f64.to_radians(),
            axis_azimuth: -90.0_f64.to_radians(),
            length: 1000.0,
            d22: 2.2,
        }
    }

    /// Optical-axis unit vector `(sin t cos p, sin t sin p, cos t)`.
    pub fn axis(&self) -> [f64; 3] {
        let (st, ct) = self.axis_polar.sin_cos();
        let (sp, cp) = self.axis_azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.axis_polar >= 0.0 && self.axis_polar <= std::f64::consts::FRAC_PI_2) {
            return Err(SpdcError::invalid(
                "crystal.axis_polar",
                "must lie in [0, pi/2]",
            ));
        }
        if !(self.length > 0.0) {
            return Err(SpdcError::invalid("crystal.length", "must be positive"));
        }
        // Indices must stay above 1 over the supported window.
        let (lo, hi) = WAVELENGTH_WINDOW_UM;
        let steps = 33;
        for i in 0..=steps {
            let lam = lo + (hi - lo) * i as f64 / steps as f64;
            self.sellmeier_o.index(lam)?;
            self.sellmeier_e.index(lam)?;
        }
        let a = self.axis();
        let norm2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
        debug_assert!((norm2 - 1.0).abs() < 1e-12);
        Ok(())
    }
}

/// Bessel-Gauss pump description. `cone_radius` is the mean transverse wave
/// number of the annulus, `annulus_width` its Gaussian width, both in 1/um.
#[derive(Debug, Clone, PartialEq)]
pub struct PumpBeam {
    pub wavelength_nm: f64,
    pub cone_radius: f64,
    pub annulus_width: f64,
    pub oam_index: i32,
    /// Lumped global amplitude `g*alpha`; all rates scale with its square.
    pub amplitude_scale: f64,
}

impl PumpBeam {
    pub fn new(wavelength_nm: f64, cone_radius: f64, annulus_width: f64, oam_index: i32) -> Self {
        PumpBeam {
            wavelength_nm,
            cone_radius,
            annulus_width,
            oam_index,
            amplitude_scale: 1.0,
        }
    }

    /// Vacuum wave number 2*pi/lambda in 1/um.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.wavelength_nm * 1e-3)
    }

    /// Hard constraints; returns soft warnings (the narrow-annulus premise is
    /// advisory, not enforced).
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(self.annulus_width > 0.0) {
            return Err(SpdcError::invalid("pump.annulus_width", "must be > 0"));
        }
        if !(self.cone_radius >= 0.0) {
            return Err(SpdcError::invalid("pump.cone_radius", "must be >= 0"));
        }
        if !(self.wavelength_nm > 0.0) {
            return Err(SpdcError::invalid("pump.wavelength", "must be > 0"));
        }
        let mut warnings = Vec::new();
        if self.cone_radius > 0.0 && self.annulus_width > 0.2 * self.cone_radius {
            warnings.push(format!(
                "annulus width W = {} is not small against the cone radius {}; \
                 the Gaussian-annulus realization assumes W << kappa_perp",
                self.annulus_width, self.cone_radius
            ));
        }
        Ok(warnings)
    }
}

/// Indices and walk-off quantities derived from a crystal at a pump
/// wavelength, with emitted-photon quantities at the degenerate wavelength
/// `2*lambda_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedIndices {
    /// Ordinary index at the degenerate emission wavelength 2*lambda_p.
    pub n_o_signal: f64,
    /// Ordinary index at the pump wavelength.
    pub n_o_pump: f64,
    /// Extraordinary principal index at the pump wavelength.
    pub n_e_pump: f64,
    /// Effective extraordinary index at normal incidence.
    pub n_eff: f64,
    /// Walk-off coefficient; `-beta * a_y` approximates the walk-off angle.
    pub beta: f64,
    /// Astigmatism coefficient in the extraordinary dispersion relation.
    pub eta: f64,
    /// Optical-axis unit vector.
    pub axis: [f64; 3],
    /// Pump vacuum wave number, 1/um.
    pub k0: f64,
}

impl DerivedIndices {
    /// Wave-vector magnitude of the degenerate emitted photons, `n_o k0 / 2`.
    pub fn emitted_shell(&self) -> f64 {
        self.n_o_signal * self.k0 / 2.0
    }

    /// On-axis pump longitudinal wave number, `n_eff k0`.
    pub fn pump_on_axis_kz(&self) -> f64 {
        self.n_eff * self.k0
    }
}

/// Evaluate permittivities and the effective-index/walk-off coefficients.
///
/// `n_eff`, `beta`, `eta` are taken at the pump wavelength, the emitted
/// ordinary index at the degenerate wavelength `2*lambda_p`.
pub fn derived_indices(crystal: &CrystalConfig, pump_wavelength_nm: f64) -> Result<DerivedIndices> {
    let lam_p = pump_wavelength_nm * 1e-3;
    let n_o_pump = crystal.sellmeier_o.index(lam_p)?;
    let n_e_pump = crystal.sellmeier_e.index(lam_p)?;
    let n_o_signal = crystal.sellmeier_o.index(2.0 * lam_p)?;
    let axis = crystal.axis();
    let eps_perp = n_o_pump * n_o_pump;
    let eps_par = n_e_pump * n_e_pump;
    let delta_eps = eps_par - eps_perp;
    let denom = eps_perp + delta_eps * axis[2] * axis[2];
    Ok(DerivedIndices {
        n_o_signal,
        n_o_pump,
        n_e_pump,
        n_eff: (eps_perp * eps_par / denom).sqrt(),
        beta: delta_eps * axis[2] / denom,
        eta: 1.0 / denom,
        axis,
        k0: 2.0 * std::f64::consts::PI / lam_p,
    })
}

/// Longitudinal wave number of a degenerate emitted (ordinary) photon:
/// `sqrt((n_o k0/2)^2 - kperp^2)`.
pub fn ordinary_kz(k_perp: f64, indices: &DerivedIndices) -> Result<f64> {
    let shell = indices.emitted_shell();
    let rad = shell * shell - k_perp * k_perp;
    if rad < 0.0 {
        return Err(SpdcError::Evanescent {
            kperp: k_perp,
            shell,
        });
    }
    Ok(rad.sqrt())
}

/// Longitudinal wave number of the extraordinary pump wave:
/// `-beta (a . kperp) + k0 n_eff sqrt(1 - eta kperp^2 / k0^2)`.
pub fn extraordinary_kz(k_perp: [f64; 2], indices: &DerivedIndices) -> Result<f64> {
    let k2 = k_perp[0] * k_perp[0] + k_perp[1] * k_perp[1];
    let rad = 1.0 - indices.eta * k2 / (indices.k0 * indices.k0);
    if rad < 0.0 {
        return Err(SpdcError::Evanescent {
            kperp: k2.sqrt(),
            shell: indices.k0 / indices.eta.sqrt(),
        });
    }
    let walkoff = indices.beta * (indices.axis[0] * k_perp[0] + indices.axis[1] * k_perp[1]);
    Ok(-walkoff + indices.k0 * indices.n_eff * rad.sqrt())
}

/// Polarization branch of a mode inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    Ordinary,
    Extraordinary,
}

/// Unnormalized mode polarization vector.
///
/// Ordinary: `a x k`. Extraordinary: `-(k (a.k)) / (eps_perp k0_mode^2) + a`,
/// with `eps_perp` and `k0_mode` at the mode's own frequency.
pub fn polarization_vector(
    k: [f64; 3],
    axis: [f64; 3],
    branch: Polarization,
    eps_perp: f64,
    k0_mode: f64,
) -> Result<[f64; 3]> {
    match branch {
        Polarization::Ordinary => {
            let v = cross(axis, k);
            let n2 = dot(v, v);
            let k2 = dot(k, k);
            if n2 <= 1e-24 * k2 {
                return Err(SpdcError::DegeneratePolarization);
            }
            Ok(v)
        }
        Polarization::Extraordinary => {
            let ak = dot(axis, k);
            let s = -ak / (eps_perp * k0_mode * k0_mode);
            Ok([
                k[0] * s + axis[0],
                k[1] * s + axis[1],
                k[2] * s + axis[2],
            ])
        }
    }
}

/// How the nonlinear contraction factor is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiMode {
    /// Replace the vectorial factor by its effective constant value.
    Effective,
    /// Evaluate the d22 bracket with wave vectors rotated into the crystal
    /// frame, normalized to 1 for collinear on-axis input.
    Vectorial,
}

/// Orthonormal crystal frame with `e3` along the optical axis.
fn crystal_frame(axis: [f64; 3]) -> ([f64; 3], [f64; 3], [f64; 3]) {
    let z = [0.0, 0.0, 1.0];
    let mut e1 = cross(z, axis);
    let n = dot(e1, e1).sqrt();
    if n < 1e-12 {
        e1 = [1.0, 0.0, 0.0];
    } else {
        e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    }
    let e2 = cross(axis, e1);
    (e1, e2, axis)
}

fn chi_bracket(kp: [f64; 3], ks: [f64; 3], ki: [f64; 3], axis: [f64; 3]) -> f64 {
    let (e1, e2, e3) = crystal_frame(axis);
    let rot = |k: [f64; 3]| [dot(k, e1), dot(k, e2), dot(k, e3)];
    let p = rot(kp);
    let s = rot(ks);
    let i = rot(ki);
    // chi ~ -d22 kz_p [ (-ky_s kx_i - kx_s ky_i) kx_p + (ky_s ky_i - kx_s kx_i) ky_p ],
    // symmetric under signal <-> idler exchange.
    p[2] * ((-s[1] * i[0] - s[0] * i[1]) * p[0] + (s[1] * i[1] - s[0] * i[0]) * p[1])
}

/// Nonlinear-susceptibility contraction factor.
///
/// In `Vectorial` mode the d22 bracket is evaluated in the crystal frame and
/// divided by its value for collinear on-axis wave vectors, so both modes
/// share the unit scale at normal incidence.
pub fn chi_contraction(
    kp: [f64; 3],
    ks: [f64; 3],
    ki: [f64; 3],
    crystal: &CrystalConfig,
    indices: &DerivedIndices,
    mode: ChiMode,
) -> f64 {
    match mode {
        ChiMode::Effective => 1.0,
        ChiMode::Vectorial => {
            let axis = crystal.axis();
            let on_axis_p = [0.0, 0.0, indices.pump_on_axis_kz()];
            let on_axis_e = [0.0, 0.0, indices.emitted_shell()];
            let reference = chi_bracket(on_axis_p, on_axis_e, on_axis_e, axis);
            chi_bracket(kp, ks, ki, axis) / reference
        }
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
