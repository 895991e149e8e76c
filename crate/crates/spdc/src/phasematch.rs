//! Longitudinal phase mismatch (exact and first-order Taylor), sinc and
//! Gaussian phase-matching envelopes, and the pump plane-wave spectrum.

use num_complex::Complex64;

use crate::crystal::{extraordinary_kz, ordinary_kz, DerivedIndices, PumpBeam};
use crate::error::Result;

/// Default Gaussian width parameter matching the sinc amplitude FWHM.
pub const GAMMA_DEFAULT: f64 = 0.4393;

/// Envelope model for the longitudinal phase-matching factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    Sinc,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchSpec {
    pub envelope: Envelope,
    pub gamma: f64,
}

impl Default for PhaseMatchSpec {
    fn default() -> Self {
        PhaseMatchSpec {
            envelope: Envelope::Sinc,
            gamma: GAMMA_DEFAULT,
        }
    }
}

impl PhaseMatchSpec {
    pub fn gaussian() -> Self {
        PhaseMatchSpec {
            envelope: Envelope::Gaussian,
            gamma: GAMMA_DEFAULT,
        }
    }
}

/// First-order Taylor description of the phase mismatch about the signal
/// wave vector: `delta_kz ~ kappa_tilde - d . (ks + ki)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchExpansion {
    /// `k0 (n_eff - n_o) + (2/(n_o k0)) |ks|^2`, 1/um.
    pub kappa_tilde: f64,
    /// `beta a_perp + (2/(n_o k0)) ks`, dimensionless.
    pub d: [f64; 2],
    /// Linearized mismatch at this (ks, ki), 1/um.
    pub delta_kz: f64,
}

/// Exact longitudinal mismatch `kz_pump(ks+ki) - kz_o(|ks|) - kz_o(|ki|)` for
/// degenerate emission.
pub fn delta_kz_exact(ks: [f64; 2], ki: [f64; 2], indices: &DerivedIndices) -> Result<f64> {
    let pump = [ks[0] + ki[0], ks[1] + ki[1]];
    let kzp = extraordinary_kz(pump, indices)?;
    let kzs = ordinary_kz((ks[0] * ks[0] + ks[1] * ks[1]).sqrt(), indices)?;
    let kzi = ordinary_kz((ki[0] * ki[0] + ki[1] * ki[1]).sqrt(), indices)?;
    Ok(kzp - kzs - kzi)
}

/// First-order Taylor mismatch, expanded about the signal wave vector.
pub fn taylor_mismatch(ks: [f64; 2], ki: [f64; 2], indices: &DerivedIndices) -> MismatchExpansion {
    let no_k0 = indices.n_o_signal * indices.k0;
    let ks2 = ks[0] * ks[0] + ks[1] * ks[1];
    let kappa_tilde = indices.k0 * (indices.n_eff - indices.n_o_signal) + 2.0 * ks2 / no_k0;
    let d = [
        indices.beta * indices.axis[0] + 2.0 * ks[0] / no_k0,
        indices.beta * indices.axis[1] + 2.0 * ks[1] / no_k0,
    ];
    let pump = [ks[0] + ki[0], ks[1] + ki[1]];
    MismatchExpansion {
        kappa_tilde,
        d,
        delta_kz: kappa_tilde - d[0] * pump[0] - d[1] * pump[1],
    }
}

/// Phase-matching amplitude at `x = L delta_kz / 2`: `sin(x)/x` or
/// `exp(-(gamma x)^2)`.
pub fn pm_envelope(delta_kz: f64, length: f64, spec: &PhaseMatchSpec) -> f64 {
    let x = 0.5 * length * delta_kz;
    match spec.envelope {
        Envelope::Sinc => sinc(x),
        Envelope::Gaussian => (-(spec.gamma * x) * (spec.gamma * x)).exp(),
    }
}

/// Unnormalized sinc, `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Scalar Bessel-Gauss pump spectrum
/// `(g alpha / kappa) exp(-(|k|-kappa)^2 / 2W^2) exp(i l phi)`.
///
/// For `kappa = 0` this falls back to a Gaussian at the origin of width `W`
/// (Gaussian-pump limit) without the `1/kappa` prefactor.
pub fn pump_spectrum(k_perp: [f64; 2], pump: &PumpBeam) -> Complex64 {
    let k = (k_perp[0] * k_perp[0] + k_perp[1] * k_perp[1]).sqrt();
    let magnitude = pump_spectrum_magnitude(k, pump);
    let phase = pump.oam_index as f64 * k_perp[1].atan2(k_perp[0]);
    Complex64::from_polar(magnitude, phase)
}

/// Modulus of the pump spectrum at radius `k` (independent of the OAM index).
pub fn pump_spectrum_magnitude(k: f64, pump: &PumpBeam) -> f64 {
    if pump.cone_radius > 0.0 {
        let t = (k - pump.cone_radius) / pump.annulus_width;
        pump.amplitude_scale * (-0.5 * t * t).exp() / pump.cone_radius
    } else {
        let t = k / pump.annulus_width;
        pump.amplitude_scale * (-0.5 * t * t).exp()
    }
}

/// Squared modulus of the pump spectrum at radius `k`; hot path for the
/// angular-spectrum quadratures (the OAM phase cancels in rates).
pub fn pump_spectrum_mag2(k: f64, pump: &PumpBeam) -> f64 {
    let m = pump_spectrum_magnitude(k, pump);
    m * m
}

/// Radial support of the pump annulus used by the angular-spectrum
/// quadratures: `[max(0, kappa - 6W), kappa + 6W]`.
pub fn pump_support(pump: &PumpBeam) -> (f64, f64) {
    let lo = (pump.cone_radius - 6.0 * pump.annulus_width).max(0.0);
    let hi = pump.cone_radius + 6.0 * pump.annulus_width;
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{derived_indices, CrystalConfig};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn idx() -> DerivedIndices {
        derived_indices(&CrystalConfig::bbo_reference(), 406.8).unwrap()
    }

    #[test]
    fn collinear_mismatch_is_index_difference() {
        let idx = idx();
        let dk = delta_kz_exact([0.0, 0.0], [0.0, 0.0], &idx).unwrap();
        assert_relative_eq!(
            dk,
            idx.k0 * (idx.n_eff - idx.n_o_signal),
            max_relative = 1e-12
        );
        assert!(dk < 0.0, "negative uniaxial collinear mismatch");
    }

    #[test]
    fn back_to_back_root_sits_at_cone_radius() {
        // Bisect delta_kz over |k| for ks = -ki and compare with the r_AS
        // formula.
        let idx = idx();
        let f = |k: f64| delta_kz_exact([0.0, -k], [0.0, k], &idx).unwrap();
        let (mut lo, mut hi) = (0.1, 1.0);
        assert!(f(lo) < 0.0 && f(hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let no_k0 = idx.n_o_signal * idx.k0;
        let r_as = (0.5 * no_k0 * no_k0 * (1.0 - idx.n_eff / idx.n_o_signal)).sqrt();
        // The closed form replaces (n_o + n_eff)/2 by n_o; agreement well
        // below the percent level.
        assert_relative_eq!(root, r_as, max_relative = 3e-4);
        assert!(f(root).abs() < 1e-10);
    }

    #[test]
    fn taylor_collapses_at_zero_signal() {
        let idx = idx();
        let m = taylor_mismatch([0.0, 0.0], [0.02, -0.07], &idx);
        assert_relative_eq!(
            m.kappa_tilde,
            idx.k0 * (idx.n_eff - idx.n_o_signal),
            max_relative = 1e-12
        );
        assert_relative_eq!(m.d[0], idx.beta * idx.axis[0], epsilon = 1e-15);
        assert_relative_eq!(m.d[1], idx.beta * idx.axis[1], epsilon = 1e-15);
    }

    #[test]
    fn kappa_tilde_equals_cone_deficit_form() {
        // kappa_tilde = (2/(n_o k0)) (|ks|^2 - r_AS^2) identically.
        let idx = idx();
        let no_k0 = idx.n_o_signal * idx.k0;
        let r_as2 = 0.5 * no_k0 * no_k0 * (1.0 - idx.n_eff / idx.n_o_signal);
        for ks in [[0.0, 0.0], [0.3, -0.1], [0.0, 0.4866], [-0.2, 0.44]] {
            let m = taylor_mismatch(ks, [0.0, 0.0], &idx);
            let ks2 = ks[0] * ks[0] + ks[1] * ks[1];
            assert_relative_eq!(
                m.kappa_tilde,
                2.0 / no_k0 * (ks2 - r_as2),
                max_relative = 1e-10,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn taylor_tracks_exact_in_paraxial_disc() {
        // Within |k| <= 0.1 the linearization stays within 2% of the exact
        // mismatch, measured against the kappa_tilde scale.
        let idx = idx();
        let scale = (idx.k0 * (idx.n_eff - idx.n_o_signal)).abs();
        let mut worst = 0.0f64;
        for i in -5..=5 {
            for j in -5..=5 {
                let ks = [0.02 * i as f64, 0.02 * j as f64];
                for (p, q) in [(0.3, -0.2), (-0.5, 0.1), (0.0, 0.0)] {
                    let ki = [0.02 * p, 0.02 * q];
                    if (ks[0] + ki[0]).hypot(ks[1] + ki[1]) > 0.1 {
                        continue;
                    }
                    let exact = delta_kz_exact(ks, ki, &idx).unwrap();
                    let taylor = taylor_mismatch(ks, ki, &idx).delta_kz;
                    worst = worst.max((exact - taylor).abs() / scale);
                }
            }
        }
        assert!(worst < 0.02, "worst relative linearization error {worst}");
    }

    #[test]
    fn envelope_values() {
        let sinc_spec = PhaseMatchSpec::default();
        let gauss_spec = PhaseMatchSpec::gaussian();
        assert_eq!(pm_envelope(0.0, 1000.0, &sinc_spec), 1.0);
        assert_eq!(pm_envelope(0.0, 1000.0, &gauss_spec), 1.0);
        // x = pi: sinc vanishes, the Gaussian leaves exp(-(gamma pi)^2).
        let dk = 2.0 * PI / 1000.0;
        assert!(pm_envelope(dk, 1000.0, &sinc_spec).abs() < 1e-15);
        assert_relative_eq!(
            pm_envelope(dk, 1000.0, &gauss_spec),
            (-(GAMMA_DEFAULT * PI).powi(2)).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            pm_envelope(dk, 1000.0, &gauss_spec),
            0.14887018835746768,
            max_relative = 1e-10
        );
    }

    #[test]
    fn envelope_even_in_mismatch() {
        for spec in [PhaseMatchSpec::default(), PhaseMatchSpec::gaussian()] {
            for dk in [1e-4, 7e-3, 0.11] {
                assert_eq!(
                    pm_envelope(dk, 1730.0, &spec),
                    pm_envelope(-dk, 1730.0, &spec)
                );
            }
        }
    }

    #[test]
    fn sinc_gaussian_deviation_on_main_lobe() {
        // Dense scan over the main lobe |x| <= pi.
        let mut max_dev = 0.0f64;
        for i in 0..=20000 {
            let x = -PI + 2.0 * PI * i as f64 / 20000.0;
            let dev = (sinc(x) - (-(GAMMA_DEFAULT * x).powi(2)).exp()).abs();
            max_dev = max_dev.max(dev);
        }
        assert!(max_dev <= 0.16, "max deviation {max_dev}");
        // The bound is tight at the lobe edge.
        assert!(max_dev > 0.148);
    }

    #[test]
    fn pump_peak_and_two_sigma_point() {
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let peak = pump_spectrum([0.05, 0.0], &pump);
        assert_relative_eq!(peak.re, 1.0 / 0.05, max_relative = 1e-12);
        assert_relative_eq!(peak.im, 0.0, epsilon = 1e-15);
        // Two-sigma radial offset.
        let v = pump_spectrum([0.05 + 2.0 * 0.0007, 0.0], &pump);
        assert_relative_eq!(v.norm(), (1.0 / 0.05) * (-2.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn pump_modulus_independent_of_oam() {
        let p0 = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let p5 = PumpBeam::new(406.8, 0.05, 0.0007, 5);
        for k in [[0.049f64, 0.004], [0.0, -0.051], [0.02, 0.02]] {
            // The radial modulus path is bit-identical: only the phase
            // carries the OAM index.
            let r = (k[0] * k[0] + k[1] * k[1]).sqrt();
            assert_eq!(pump_spectrum_mag2(r, &p0), pump_spectrum_mag2(r, &p5));
            assert_relative_eq!(
                pump_spectrum(k, &p0).norm(),
                pump_spectrum(k, &p5).norm(),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn pump_modulus_rotationally_symmetric() {
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 3);
        let r = 0.0503;
        let reference = pump_spectrum([r, 0.0], &pump).norm();
        for i in 1..32 {
            let phi = 2.0 * PI * i as f64 / 32.0;
            let v = pump_spectrum([r * phi.cos(), r * phi.sin()], &pump).norm();
            assert_relative_eq!(v, reference, max_relative = 1e-12);
        }
    }

    #[test]
    fn pump_gaussian_limit_at_zero_cone_radius() {
        let pump = PumpBeam::new(406.8, 0.0, 0.0007, 0);
        assert_relative_eq!(pump_spectrum([0.0, 0.0], &pump).re, 1.0, epsilon = 1e-15);
        let v = pump_spectrum([0.0007, 0.0], &pump).norm();
        assert_relative_eq!(v, (-0.5f64).exp(), max_relative = 1e-12);
    }
}
