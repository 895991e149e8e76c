//! Angular spectrum (AS) and conditional angular spectrum (CAS), each
//! computed by full numerical quadrature and by the closed-form
//! approximations, plus the emission-cone geometry estimates.
//!
//! All rates are reported up to the global constant `g*alpha` (squared); the
//! pump's `amplitude_scale` carries that factor.

use crate::crystal::{extraordinary_kz, ordinary_kz, CrystalConfig, DerivedIndices, PumpBeam};
use crate::crystal::derived_indices;
use crate::error::{Result, SpdcError};
use crate::grid::SpectrumGrid;
use crate::phasematch::{
    pm_envelope, pump_spectrum_mag2, pump_support, sinc, Envelope, PhaseMatchSpec,
};
use crate::quad::{gauss_legendre, parallel_cell_map, Neumaier, QuadratureSpec};

/// Geometry of the emission cone(s): mean radius, Gaussian ridge width, and
/// the displaced-cone estimates for conical pumping.
///
/// The displaced-cone formulas assume the optical axis in the Y-Z plane with
/// positive a_y; `warnings` lists premise violations.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeGeometry {
    /// Mean transverse radius of the degenerate emission cone, 1/um.
    pub r_as: f64,
    /// Gaussian width scale of the ridge (in the (k^2 - r^2) exponent), 1/um.
    pub sigma_as: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// Cone-axis displacements along the transverse axis projection, 1/um.
    pub a_plus: f64,
    pub a_minus: f64,
    /// Tilt of the emission cone: asin(r_AS / (n_o k0 / 2)).
    pub emission_tilt: f64,
    pub warnings: Vec<String>,
}

/// Full emission-cone geometry from the derived indices and pump.
pub fn cone_geometry(
    crystal: &CrystalConfig,
    pump: &PumpBeam,
    gamma: f64,
) -> Result<ConeGeometry> {
    let idx = derived_indices(crystal, pump.wavelength_nm)?;
    cone_geometry_from_indices(&idx, pump.cone_radius, crystal.length, gamma)
}

pub fn cone_geometry_from_indices(
    idx: &DerivedIndices,
    pump_cone_radius: f64,
    length: f64,
    gamma: f64,
) -> Result<ConeGeometry> {
    let n_o = idx.n_o_signal;
    if idx.n_eff >= n_o {
        return Err(SpdcError::NoRealCone {
            neff: idx.n_eff,
            no: n_o,
        });
    }
    let no_k0 = n_o * idx.k0;
    let r_as = (0.5 * no_k0 * no_k0 * (1.0 - idx.n_eff / n_o)).sqrt();
    let sigma_as = no_k0 / (std::f64::consts::SQRT_2 * gamma * length);
    let g = no_k0 * idx.beta * idx.axis[1] / (2.0 * r_as);
    let kappa = pump_cone_radius;
    let bracket_plus = 1.0 + g - kappa / (2.0 * r_as);
    let bracket_minus = 1.0 - g + kappa / (2.0 * r_as);
    let mut warnings = Vec::new();
    if idx.axis[0].abs() > 1e-9 {
        warnings.push("displaced-cone estimates assume the optical axis in the Y-Z plane".into());
    }
    let m = (no_k0 * idx.beta * idx.axis[1] / 2.0).abs();
    if m < r_as {
        warnings.push(format!(
            "walk-off scale |n_o k0 beta a_y / 2| = {m:.4} below r_AS = {r_as:.4}; \
             displaced-cone estimates lose accuracy"
        ));
    }
    if kappa > 0.3 * r_as {
        warnings.push(format!(
            "pump cone radius {kappa} is not small against r_AS = {r_as:.4}; \
             displaced-cone estimates lose accuracy"
        ));
    }
    Ok(ConeGeometry {
        r_as,
        sigma_as,
        r_plus: r_as - 0.5 * kappa * bracket_plus,
        r_minus: r_as - 0.5 * kappa * bracket_minus,
        a_plus: -0.5 * kappa * bracket_plus,
        a_minus: 0.5 * kappa * bracket_plus,
        emission_tilt: (r_as / (no_k0 / 2.0)).asin(),
        warnings,
    })
}

/// Per-cell diagnostic attached to a computed map.
#[derive(Debug, Clone, PartialEq)]
pub enum CellIssue {
    /// Doubling did not reach the requested tolerance; carries the final
    /// relative error estimate.
    Unconverged { cell: usize, rel_error: f64 },
    /// The integrand left the dispersion domain.
    Domain { cell: usize, message: String },
}

/// A computed map plus the coarser quadrature level it was checked against
/// and any per-cell diagnostics.
#[derive(Debug, Clone)]
pub struct SpectrumMap {
    pub grid: SpectrumGrid,
    /// Same map one Richardson level below the returned one (first pass).
    pub coarse: SpectrumGrid,
    pub issues: Vec<CellIssue>,
}

impl SpectrumMap {
    pub fn converged_fraction(&self) -> f64 {
        let bad = self
            .issues
            .iter()
            .filter(|i| matches!(i, CellIssue::Unconverged { .. }))
            .count();
        1.0 - bad as f64 / self.grid.values.len() as f64
    }

    /// Largest relative change between the final and first-pass grids.
    pub fn max_doubling_change(&self) -> f64 {
        let peak = self.grid.max_value().max(f64::MIN_POSITIVE);
        self.grid
            .values
            .iter()
            .zip(&self.coarse.values)
            .map(|(a, b)| (a - b).abs() / peak)
            .fold(0.0, f64::max)
    }
}

/// Precomputed tensor-rule tables for the pump-annulus integral, shared by
/// every output cell. Levels double both directions.
struct AnnulusTables {
    levels: Vec<LevelTable>,
}

struct LevelTable {
    /// Radial abscissas.
    r: Vec<f64>,
    /// Per-node weight: GL weight x r x dphi x |pump|^2(r).
    w_pump: Vec<f64>,
    cos_phi: Vec<f64>,
    sin_phi: Vec<f64>,
    /// Pump longitudinal wave number at (r_i, phi_j), row-major [i][j].
    kz_pump: Vec<f64>,
}

impl AnnulusTables {
    fn build(pump: &PumpBeam, idx: &DerivedIndices, quad: &QuadratureSpec) -> Self {
        let (r_lo, r_hi) = pump_support(pump);
        let n_levels = quad.max_doublings.max(1) + 1;
        let mut levels = Vec::with_capacity(n_levels);
        for level in 0..n_levels {
            let nr = quad.radial_points << level;
            let nphi = quad.azimuthal_points << level;
            let (x, w) = gauss_legendre(nr);
            let half = 0.5 * (r_hi - r_lo);
            let mid = 0.5 * (r_hi + r_lo);
            let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
            let r: Vec<f64> = x.iter().map(|xi| mid + half * xi).collect();
            let w_pump: Vec<f64> = r
                .iter()
                .zip(&w)
                .map(|(ri, wi)| half * wi * ri * dphi * pump_spectrum_mag2(*ri, pump))
                .collect();
            let cos_phi: Vec<f64> = (0..nphi).map(|j| (j as f64 * dphi).cos()).collect();
            let sin_phi: Vec<f64> = (0..nphi).map(|j| (j as f64 * dphi).sin()).collect();
            let mut kz_pump = Vec::with_capacity(nr * nphi);
            for ri in &r {
                let iso = idx.k0
                    * idx.n_eff
                    * (1.0 - idx.eta * ri * ri / (idx.k0 * idx.k0)).sqrt();
                for j in 0..nphi {
                    let walk = idx.beta
                        * (idx.axis[0] * ri * cos_phi[j] + idx.axis[1] * ri * sin_phi[j]);
                    kz_pump.push(iso - walk);
                }
            }
            levels.push(LevelTable {
                r,
                w_pump,
                cos_phi,
                sin_phi,
                kz_pump,
            });
        }
        AnnulusTables { levels }
    }
}

/// Angular spectrum by full quadrature over the idler transverse plane,
/// with the inner integration variable changed to the pump transverse
/// vector (the pump annulus is the only support).
pub fn as_numeric(
    template: &SpectrumGrid,
    crystal: &CrystalConfig,
    pump: &PumpBeam,
    quad: &QuadratureSpec,
    pm: &PhaseMatchSpec,
) -> Result<SpectrumMap> {
    quad.validate()?;
    crystal.validate()?;
    pump.validate()?;
    let idx = derived_indices(crystal, pump.wavelength_nm)?;
    let tables = AnnulusTables::build(pump, &idx, quad);
    let shell = idx.emitted_shell();
    let shell2 = shell * shell;
    let length = crystal.length;
    let rel_tol = quad.rel_tol;
    let gamma = pm.gamma;
    let use_sinc = pm.envelope == Envelope::Sinc;

    let n_cells = template.nx * template.ny;
    let geometry = template.clone();

    #[derive(Clone, Copy)]
    enum CellOutcome {
        Ok {
            value: f64,
            coarse: f64,
            rel_err: f64,
            converged: bool,
        },
        Domain,
    }

    let eval_level = |lvl: &LevelTable, kx: f64, ky: f64, kzs: f64, ks2: f64| -> Option<f64> {
        let nphi = lvl.cos_phi.len();
        let mut acc = Neumaier::default();
        for (i, ri) in lvl.r.iter().enumerate() {
            let wi = lvl.w_pump[i];
            if wi == 0.0 {
                continue;
            }
            let ri2_ks2 = ri * ri + ks2;
            let row = i * nphi;
            for j in 0..nphi {
                let dot = kx * lvl.cos_phi[j] + ky * lvl.sin_phi[j];
                let ki2 = ri2_ks2 - 2.0 * ri * dot;
                let rad = shell2 - ki2;
                if rad < 0.0 {
                    return None;
                }
                let dkz = lvl.kz_pump[row + j] - kzs - rad.sqrt();
                let x = 0.5 * length * dkz;
                let env = if use_sinc {
                    sinc(x)
                } else {
                    (-(gamma * x) * (gamma * x)).exp()
                };
                acc.add(wi * env * env);
            }
        }
        Some(acc.total())
    };

    let outcomes: Vec<CellOutcome> = parallel_cell_map(n_cells, |flat| {
        let (kx, ky) = geometry.cell_center(flat);
        let ks2 = kx * kx + ky * ky;
        if ks2 > shell2 {
            return CellOutcome::Domain;
        }
        let kzs = (shell2 - ks2).sqrt();
        let mut prev = match eval_level(&tables.levels[0], kx, ky, kzs, ks2) {
            Some(v) => v,
            None => return CellOutcome::Domain,
        };
        let mut value = prev;
        let mut coarse = prev;
        let mut rel_err = f64::INFINITY;
        let mut converged = false;
        for lvl in &tables.levels[1..] {
            let refined = match eval_level(lvl, kx, ky, kzs, ks2) {
                Some(v) => v,
                None => return CellOutcome::Domain,
            };
            coarse = prev;
            value = refined;
            rel_err = (refined - prev).abs() / refined.abs().max(f64::MIN_POSITIVE);
            prev = refined;
            if rel_err <= rel_tol {
                converged = true;
                break;
            }
        }
        CellOutcome::Ok {
            value: value.max(0.0),
            coarse: coarse.max(0.0),
            rel_err,
            converged,
        }
    });

    let mut grid = template.clone();
    let mut coarse = template.clone();
    let mut issues = Vec::new();
    for (flat, outcome) in outcomes.iter().enumerate() {
        match outcome {
            CellOutcome::Ok {
                value,
                coarse: c,
                rel_err,
                converged,
            } => {
                grid.values[flat] = *value;
                coarse.values[flat] = *c;
                if !converged {
                    issues.push(CellIssue::Unconverged {
                        cell: flat,
                        rel_error: *rel_err,
                    });
                }
            }
            CellOutcome::Domain => {
                issues.push(CellIssue::Domain {
                    cell: flat,
                    message: "evanescent emitted wave".into(),
                });
            }
        }
    }
    Ok(SpectrumMap {
        grid,
        coarse,
        issues,
    })
}

/// Closed-form angular spectrum: Gaussian envelope, first-order mismatch and
/// the W -> 0 pump limit, leaving a single azimuthal integral per cell.
pub fn as_analytic(
    template: &SpectrumGrid,
    crystal: &CrystalConfig,
    pump: &PumpBeam,
    phi_points: usize,
    gamma: f64,
) -> Result<SpectrumGrid> {
    crystal.validate()?;
    pump.validate()?;
    let idx = derived_indices(crystal, pump.wavelength_nm)?;
    let cone = cone_geometry_from_indices(&idx, pump.cone_radius, crystal.length, gamma)?;
    let r_as2 = cone.r_as * cone.r_as;
    let no_k0 = idx.n_o_signal * idx.k0;
    let gl = gamma * crystal.length;
    let sigma_inv2 = 2.0 * (gl / no_k0) * (gl / no_k0);
    let kappa = pump.cone_radius;
    let scale = pump.amplitude_scale * pump.amplitude_scale;
    let n_cells = template.nx * template.ny;
    let geometry = template.clone();
    let n_phi = phi_points.max(8);

    let values = parallel_cell_map(n_cells, |flat| {
        let (kx, ky) = geometry.cell_center(flat);
        let ks2 = kx * kx + ky * ky;
        let kappa_tilde = idx.k0 * (idx.n_eff - idx.n_o_signal) + 2.0 * ks2 / no_k0;
        let d = [
            idx.beta * idx.axis[0] + 2.0 * kx / no_k0,
            idx.beta * idx.axis[1] + 2.0 * ky / no_k0,
        ];
        let d_norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let prefactor = scale * (-sigma_inv2 * (ks2 - r_as2) * (ks2 - r_as2)).exp();
        let amp = d_norm * kappa;
        let integral = if amp * gl < 1e-12 {
            // |d| kappa = 0: constant integrand, handled analytically.
            2.0 * std::f64::consts::PI * (-0.5 * (gl * kappa_tilde) * (gl * kappa_tilde)).exp()
        } else {
            // Integrand depends on phi only through sin(phi); the rotation of
            // the phi origin by theta_r = acos(d_x/|d|) drops out over a full
            // period.
            let step = 2.0 * std::f64::consts::PI / n_phi as f64;
            let mut acc = Neumaier::default();
            for j in 0..n_phi {
                let arg = amp * (j as f64 * step).sin() - kappa_tilde;
                acc.add((-0.5 * (gl * arg) * (gl * arg)).exp());
            }
            acc.total() * step
        };
        prefactor * integral
    });

    let mut grid = template.clone();
    grid.values = values;
    Ok(grid)
}

/// Conditional angular spectrum at a fixed idler, by pointwise evaluation of
/// the degenerate monochromatic reduction
/// `R_c = |psi(ks + ki)|^2 env^2(L dkz / 2)`.
pub fn cas_numeric(
    template: &SpectrumGrid,
    idler: [f64; 2],
    crystal: &CrystalConfig,
    pump: &PumpBeam,
    pm: &PhaseMatchSpec,
) -> Result<SpectrumMap> {
    crystal.validate()?;
    pump.validate()?;
    let idx = derived_indices(crystal, pump.wavelength_nm)?;
    let kzi = ordinary_kz((idler[0] * idler[0] + idler[1] * idler[1]).sqrt(), &idx)?;
    let shell2 = idx.emitted_shell() * idx.emitted_shell();
    let scale = 1.0;
    let n_cells = template.nx * template.ny;
    let geometry = template.clone();

    let values: Vec<std::result::Result<f64, String>> = parallel_cell_map(n_cells, |flat| {
        let (kx, ky) = geometry.cell_center(flat);
        let ks2 = kx * kx + ky * ky;
        if ks2 > shell2 {
            return Err("evanescent signal".to_string());
        }
        let kzs = (shell2 - ks2).sqrt();
        let pumpk = [kx + idler[0], ky + idler[1]];
        let kzp = match extraordinary_kz(pumpk, &idx) {
            Ok(v) => v,
            Err(e) => return Err(e.to_string()),
        };
        let mag2 = pump_spectrum_mag2((pumpk[0] * pumpk[0] + pumpk[1] * pumpk[1]).sqrt(), pump);
        let env = pm_envelope(kzp - kzs - kzi, crystal.length, pm);
        Ok(scale * mag2 * env * env)
    });

    let mut grid = template.clone();
    let mut issues = Vec::new();
    for (flat, v) in values.iter().enumerate() {
        match v {
            Ok(val) => grid.values[flat] = *val,
            Err(msg) => issues.push(CellIssue::Domain {
                cell: flat,
                message: msg.clone(),
            }),
        }
    }
    Ok(SpectrumMap {
        coarse: grid.clone(),
        grid,
        issues,
    })
}

/// Closed-form CAS parameters: effective ring width, ring center and signed
/// squared ring radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasClosedForm {
    pub w_eff: f64,
    pub k0_perp: [f64; 2],
    /// Signed square of the ring radius; negative means no real ring.
    pub r_k_squared: f64,
}

impl CasClosedForm {
    pub fn r_k(&self) -> f64 {
        self.r_k_squared.abs().sqrt()
    }
}

/// Closed-form CAS evaluated on a grid, plus its defining parameters.
pub fn cas_analytic(
    template: &SpectrumGrid,
    idler: [f64; 2],
    crystal: &CrystalConfig,
    pump: &PumpBeam,
    gamma: f64,
) -> Result<(SpectrumGrid, CasClosedForm)> {
    crystal.validate()?;
    pump.validate()?;
    let idx = derived_indices(crystal, pump.wavelength_nm)?;
    let form = cas_closed_form(idler, &idx, crystal.length, pump, gamma);
    let w_eff2 = form.w_eff * form.w_eff;
    let w = pump.annulus_width;
    let scale = pump.amplitude_scale * pump.amplitude_scale
        / (2.0 * std::f64::consts::PI * w * w);
    // The difference-of-squares exponent is rendered as the squared radial
    // offset from the ring |k - K0| = R_k: the literal difference of squares
    // diverges inside the ring and carries no ridge, while near the ring the
    // two readings agree to first order. A negative signed square means no
    // real ring; the offset then measures from the ring collapse point.
    let ring = form.r_k_squared.max(0.0).sqrt();
    let mut grid = template.clone();
    for flat in 0..grid.values.len() {
        let (kx, ky) = grid.cell_center(flat);
        let dx = kx - form.k0_perp[0];
        let dy = ky - form.k0_perp[1];
        let off = (dx * dx + dy * dy).sqrt() - ring;
        let arg = (off * off + form.r_k_squared.min(0.0).abs()) / (2.0 * w_eff2);
        grid.values[flat] = scale * (-arg).exp();
    }
    Ok((grid, form))
}

/// Defining equations of the closed-form CAS.
pub fn cas_closed_form(
    idler: [f64; 2],
    idx: &DerivedIndices,
    length: f64,
    pump: &PumpBeam,
    gamma: f64,
) -> CasClosedForm {
    let w = pump.annulus_width;
    let gl = gamma * length;
    let gl2 = gl * gl;
    let a_perp = [idx.axis[0], idx.axis[1]];
    let ki_norm2 = idler[0] * idler[0] + idler[1] * idler[1];
    let ki_norm = ki_norm2.sqrt();
    let a_dot_khat = if ki_norm > 0.0 {
        (a_perp[0] * idler[0] + a_perp[1] * idler[1]) / ki_norm
    } else {
        0.0
    };
    let w_eff = (1.0 / (w * w) + gl2 * idx.beta * idx.beta * a_dot_khat * a_dot_khat)
        .sqrt()
        .recip();
    let ratio2 = (w_eff / w) * (w_eff / w);
    let no_k0 = idx.n_o_signal * idx.k0;
    let mismatch0 = idx.k0 * (idx.n_eff - idx.n_o_signal)
        - idx.beta * (a_perp[0] * idler[0] + a_perp[1] * idler[1]);
    let v = [
        2.0 * idler[0] / no_k0 - idx.beta * a_perp[0],
        2.0 * idler[1] / no_k0 - idx.beta * a_perp[1],
    ];
    let glw2 = gl2 * w_eff * w_eff;
    let k0_perp = [
        -ratio2 * idler[0] + glw2 * mismatch0 * v[0],
        -ratio2 * idler[1] + glw2 * mismatch0 * v[1],
    ];
    let scalar = 2.0 * ki_norm2 / no_k0
        - idx.beta * (a_perp[0] * idler[0] + a_perp[1] * idler[1]);
    let r_k_squared = ratio2 * pump.cone_radius * pump.cone_radius
        + ki_norm2 * (ratio2 * ratio2 - ratio2)
        + 2.0 * glw2 * mismatch0 * scalar
        - scalar * scalar * glw2 * (1.0 - glw2 * (v[0] * v[0] + v[1] * v[1]));
    CasClosedForm {
        w_eff,
        k0_perp,
        r_k_squared,
    }
}

/// Signed residual of the propagation-invariance condition for degenerate
/// photons: zero when the signal lies on the tilted invariance cone of the
/// conditioned pair. Written in the transverse-sum form; the LHS terms scale
/// with `(k_perp_s)^2`.
pub fn pi_residual(
    ks: [f64; 2],
    ki: [f64; 2],
    idx: &DerivedIndices,
    pump_cone_radius: f64,
) -> f64 {
    let k0i = idx.emitted_shell();
    let sum2 = {
        let sx = ks[0] + ki[0];
        let sy = ks[1] + ki[1];
        sx * sx + sy * sy
    };
    let ks2 = ks[0] * ks[0] + ks[1] * ks[1];
    let correction = if ks2 > 0.0 {
        let ks_norm = ks2.sqrt();
        let khat = [ks[0] / ks_norm, ks[1] / ks_norm];
        let ki_dot_khat = ki[0] * khat[0] + ki[1] * khat[1];
        let ki2 = ki[0] * ki[0] + ki[1] * ki[1];
        let ki_dot_ks = ki[0] * ks[0] + ki[1] * ks[1];
        ks2 / (k0i * k0i) * (ki_dot_khat * ki_dot_khat + ki2 + ki_dot_ks)
    } else {
        0.0
    };
    sum2 - correction - pump_cone_radius * pump_cone_radius
}

/// Argmax cell center of a grid; exact ties break toward the smallest |k|,
/// then the smallest azimuth in [0, 2 pi).
pub fn find_max(grid: &SpectrumGrid) -> Result<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64, f64, f64)> = None; // v, |k|, az, kx, ky
    for flat in 0..grid.values.len() {
        let v = grid.values[flat];
        if v <= 0.0 && best.is_some() {
            continue;
        }
        let (kx, ky) = grid.cell_center(flat);
        let norm = kx.hypot(ky);
        let mut az = ky.atan2(kx);
        if az < 0.0 {
            az += 2.0 * std::f64::consts::PI;
        }
        let better = match &best {
            None => true,
            Some((bv, bn, ba, _, _)) => {
                v > *bv || (v == *bv && (norm < *bn || (norm == *bn && az < *ba)))
            }
        };
        if better {
            best = Some((v, norm, az, kx, ky));
        }
    }
    let (v, _, _, kx, ky) = best.ok_or(SpdcError::EmptyGrid)?;
    if v <= 0.0 {
        return Err(SpdcError::EmptyGrid);
    }
    Ok((kx, ky, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference() -> (CrystalConfig, PumpBeam) {
        (
            CrystalConfig::bbo_reference(),
            PumpBeam::new(406.8, 0.05, 0.0007, 0),
        )
    }

    fn printed_convention() -> CrystalConfig {
        CrystalConfig {
            axis_azimuth: 90.0_f64.to_radians(),
            ..CrystalConfig::bbo_reference()
        }
    }

    fn small_quad() -> QuadratureSpec {
        QuadratureSpec {
            radial_points: 12,
            azimuthal_points: 96,
            rel_tol: 1e-2,
            max_doublings: 2,
        }
    }

    #[test]
    fn cone_geometry_reference_values() {
        // Printed-formula convention (axis with positive a_y) reproduces the
        // quoted values: r_AS ~ 0.49, A+- ~ +-0.02, R+ ~ 0.51 (the source
        // figure caption prints 0.051; the formulas give 0.51).
        let crystal = printed_convention();
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let cone = cone_geometry(&crystal, &pump, crate::phasematch::GAMMA_DEFAULT).unwrap();
        assert!((cone.r_as - 0.49).abs() < 0.05, "r_AS = {}", cone.r_as);
        assert_relative_eq!(cone.r_as, 0.48657863352007, max_relative = 1e-10);
        assert!((cone.a_plus - 0.021).abs() < 0.005, "A+ = {}", cone.a_plus);
        assert!((cone.a_minus + 0.021).abs() < 0.005);
        assert!((cone.r_plus - 0.51).abs() < 0.01, "R+ = {}", cone.r_plus);
        assert!((cone.r_minus - 0.416).abs() < 0.01);
        assert_relative_eq!(cone.emission_tilt, 0.03796121015396399, max_relative = 1e-10);
        assert!(cone.warnings.is_empty(), "{:?}", cone.warnings);
    }

    #[test]
    fn cone_geometry_invariants_reproducible() {
        let crystal = printed_convention();
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let idx = derived_indices(&crystal, 406.8).unwrap();
        let cone = cone_geometry(&crystal, &pump, 0.4393).unwrap();
        let no_k0 = idx.n_o_signal * idx.k0;
        assert_relative_eq!(
            cone.r_as * cone.r_as,
            0.5 * no_k0 * no_k0 * (1.0 - idx.n_eff / idx.n_o_signal),
            max_relative = 1e-12
        );
        let g = no_k0 * idx.beta * idx.axis[1] / (2.0 * cone.r_as);
        let b = 1.0 + g - pump.cone_radius / (2.0 * cone.r_as);
        assert_relative_eq!(cone.r_plus, cone.r_as - 0.5 * pump.cone_radius * b, max_relative = 1e-12);
        assert_relative_eq!(cone.a_plus, -0.5 * pump.cone_radius * b, max_relative = 1e-12);
        assert_relative_eq!(cone.a_minus, -cone.a_plus, max_relative = 1e-12);
    }

    #[test]
    fn cone_geometry_positive_uniaxial_rejected() {
        use crate::crystal::Sellmeier;
        let crystal = CrystalConfig {
            // Swap o/e: positive uniaxial.
            sellmeier_o: crate::crystal::BBO_EXTRAORDINARY,
            sellmeier_e: Sellmeier::constant(3.2),
            ..CrystalConfig::bbo_reference()
        };
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        match cone_geometry(&crystal, &pump, 0.4393) {
            Err(SpdcError::NoRealCone { .. }) => {}
            other => panic!("expected NoRealCone, got {other:?}"),
        }
    }

    #[test]
    fn cone_geometry_warns_outside_regime() {
        let crystal = printed_convention();
        let pump = PumpBeam::new(406.8, 0.15, 0.0007, 0);
        let cone = cone_geometry(&crystal, &pump, 0.4393).unwrap();
        assert_eq!(cone.warnings.len(), 1);
    }

    #[test]
    fn find_max_single_peak_and_tie_breaks() {
        let mut g = SpectrumGrid::zeros_centered(16, 0.8);
        g.values[5 * 16 + 9] = 3.0;
        let (kx, ky, v) = find_max(&g).unwrap();
        assert_eq!(v, 3.0);
        assert_relative_eq!(kx, g.kx_at(9));
        assert_relative_eq!(ky, g.ky_at(5));
        // Uniform grid: the tie-break lands on the smallest |k|, then the
        // smallest azimuth; with an even grid the four innermost cells tie on
        // |k| and the azimuth picks the first quadrant.
        let mut g = SpectrumGrid::zeros_centered(4, 1.0);
        g.values.iter_mut().for_each(|v| *v = 1.0);
        let (kx, ky, _) = find_max(&g).unwrap();
        assert!(kx > 0.0 && ky > 0.0, "({kx},{ky})");
        // All-zero grid is flagged.
        let g = SpectrumGrid::zeros_centered(4, 1.0);
        assert!(matches!(find_max(&g), Err(SpdcError::EmptyGrid)));
    }

    #[test]
    fn as_numeric_matches_direct_integral_on_probe_cells() {
        // Cross-check the table-driven cell evaluation against the generic
        // annulus integrator.
        let (crystal, pump) = reference();
        let idx = derived_indices(&crystal, 406.8).unwrap();
        let pm = PhaseMatchSpec::default();
        let template = SpectrumGrid::zeros(3, 3, (-0.05, 0.067), (-0.52, -0.43));
        let map = as_numeric(&template, &crystal, &pump, &small_quad(), &pm).unwrap();
        let (r_lo, r_hi) = pump_support(&pump);
        for flat in [0usize, 4, 8] {
            let (kx, ky) = template.cell_center(flat);
            let kzs = ordinary_kz(kx.hypot(ky), &idx).unwrap();
            let f = |r: f64, phi: f64| {
                let kp = [r * phi.cos(), r * phi.sin()];
                let ki = [kp[0] - kx, kp[1] - ky];
                let kzi = ordinary_kz(ki[0].hypot(ki[1]), &idx).unwrap();
                let kzp = extraordinary_kz(kp, &idx).unwrap();
                let env = pm_envelope(kzp - kzs - kzi, crystal.length, &pm);
                pump_spectrum_mag2(r, &pump) * env * env
            };
            let direct =
                crate::quad::integrate_annulus(f, r_lo, r_hi, &small_quad()).unwrap();
            assert_relative_eq!(map.grid.values[flat], direct.value, max_relative = 1e-10);
        }
    }

    #[test]
    fn as_numeric_oam_invariance_bitwise() {
        let (crystal, _) = reference();
        let pm = PhaseMatchSpec::default();
        let template = SpectrumGrid::zeros_centered(16, 0.6);
        let quad = small_quad();
        let p0 = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let p3 = PumpBeam::new(406.8, 0.05, 0.0007, 3);
        let m0 = as_numeric(&template, &crystal, &p0, &quad, &pm).unwrap();
        let m3 = as_numeric(&template, &crystal, &p3, &quad, &pm).unwrap();
        assert_eq!(m0.grid.values, m3.grid.values); // bitwise
    }

    #[test]
    fn as_numeric_mirror_symmetry() {
        // Axis in the Y-Z plane: AS(kx, ky) = AS(-kx, ky) up to rounding.
        let (crystal, pump) = reference();
        let pm = PhaseMatchSpec::default();
        let template = SpectrumGrid::zeros_centered(16, 0.6);
        let map = as_numeric(&template, &crystal, &pump, &small_quad(), &pm).unwrap();
        let g = &map.grid;
        let peak = g.max_value();
        for i in 0..g.ny {
            for j in 0..g.nx {
                let m = g.values[g.index(i, g.nx - 1 - j)];
                let v = g.values[g.index(i, j)];
                assert!(
                    (v - m).abs() <= 1e-10 * peak,
                    "asymmetry at ({i},{j}): {v} vs {m}"
                );
            }
        }
    }

    #[test]
    fn as_numeric_rotational_covariance() {
        // Rotating the optical-axis azimuth by 90 deg rotates the map by
        // 90 deg exactly (up to rounding) on a square centered grid.
        let (crystal, pump) = reference();
        let pm = PhaseMatchSpec::default();
        let rotated = CrystalConfig {
            axis_azimuth: crystal.axis_azimuth + std::f64::consts::FRAC_PI_2,
            ..crystal.clone()
        };
        let template = SpectrumGrid::zeros_centered(12, 0.6);
        let base = as_numeric(&template, &crystal, &pump, &small_quad(), &pm).unwrap();
        let rot = as_numeric(&template, &rotated, &pump, &small_quad(), &pm).unwrap();
        let n = 12;
        let peak = base.grid.max_value();
        for i in 0..n {
            for j in 0..n {
                // value_rot(i, j) corresponds to base at (row = j, col = n-1-i).
                let a = rot.grid.values[rot.grid.index(i, j)];
                let b = base.grid.values[base.grid.index(j, n - 1 - i)];
                assert!(
                    (a - b).abs() <= 1e-9 * peak,
                    "rotation mismatch at ({i},{j}): {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn as_analytic_peak_ring_value_at_zero_cone_radius() {
        // For a Gaussian pump (kappa = 0) the exponentials collapse on the
        // ridge |k| = r_AS and the map value is the bare azimuthal period,
        // 2 pi times the unit prefactor.
        let crystal = CrystalConfig::bbo_reference();
        let pump = PumpBeam::new(406.8, 0.0, 0.0007, 0);
        let cone = cone_geometry(&crystal, &pump, 0.4393).unwrap();
        let r = cone.r_as;
        // Tiny cells whose centers straddle the ridge within 5e-7.
        let ridge = SpectrumGrid::zeros(2, 2, (r - 1e-6, r + 1e-6), (-1e-6, 1e-6));
        let g = as_analytic(&ridge, &crystal, &pump, 128, 0.4393).unwrap();
        for v in &g.values {
            assert_relative_eq!(*v, 2.0 * std::f64::consts::PI, max_relative = 1e-6);
        }
    }

    #[test]
    fn cas_numeric_short_crystal_reduces_to_pump_annulus() {
        // L -> 0: the envelope drops out, leaving the translated annulus.
        let crystal = CrystalConfig {
            length: 1e-6,
            ..CrystalConfig::bbo_reference()
        };
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let idler = [0.03, -0.48];
        let template = SpectrumGrid::zeros_about(64, [-idler[0], -idler[1]], 0.08);
        let map = cas_numeric(&template, idler, &crystal, &pump, &PhaseMatchSpec::default())
            .unwrap();
        for flat in (0..template.values.len()).step_by(97) {
            let (kx, ky) = template.cell_center(flat);
            let r = (kx + idler[0]).hypot(ky + idler[1]);
            assert_relative_eq!(
                map.grid.values[flat],
                pump_spectrum_mag2(r, &pump),
                max_relative = 1e-8,
                epsilon = 1e-30
            );
        }
    }

    #[test]
    fn cas_numeric_oam_invariance_bitwise() {
        let crystal = CrystalConfig::bbo_reference();
        let idler = [0.03, -0.48];
        let template = SpectrumGrid::zeros_about(32, [-idler[0], -idler[1]], 0.08);
        let pm = PhaseMatchSpec::default();
        let a = cas_numeric(&template, idler, &crystal, &PumpBeam::new(406.8, 0.05, 0.0007, 0), &pm).unwrap();
        let b = cas_numeric(&template, idler, &crystal, &PumpBeam::new(406.8, 0.05, 0.0007, 3), &pm).unwrap();
        assert_eq!(a.grid.values, b.grid.values);
    }

    #[test]
    fn cas_mass_concentrated_on_pump_annulus() {
        // Mass outside | |ks+ki| - kappa | <= 4W below 1e-4 of the total.
        let crystal = CrystalConfig::bbo_reference();
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let idler = [0.03, -0.48];
        let template = SpectrumGrid::zeros_about(256, [-idler[0], -idler[1]], 0.12);
        let map = cas_numeric(&template, idler, &crystal, &pump, &PhaseMatchSpec::default())
            .unwrap();
        let mut inside = 0.0;
        let mut total = 0.0;
        for flat in 0..map.grid.values.len() {
            let (kx, ky) = map.grid.cell_center(flat);
            let r = (kx + idler[0]).hypot(ky + idler[1]);
            let v = map.grid.values[flat];
            total += v;
            if (r - pump.cone_radius).abs() <= 4.0 * pump.annulus_width {
                inside += v;
            }
        }
        assert!(total > 0.0);
        assert!((total - inside) / total < 1e-4, "outside fraction {}", (total - inside) / total);
    }

    #[test]
    fn cas_closed_form_short_crystal_collapse() {
        // L = 1 um: W_eff = W, K0 = -ki, R_k = kappa to 1e-10.
        let crystal = CrystalConfig {
            length: 1.0,
            ..CrystalConfig::bbo_reference()
        };
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let idx = derived_indices(&crystal, 406.8).unwrap();
        let idler = [0.027, -0.485];
        let form = cas_closed_form(idler, &idx, crystal.length, &pump, 0.4393);
        // Residuals scale with (gamma L)^2; at L = 1 um they sit at the
        // 1e-13 / 1e-10 / 1e-9 level for W_eff / K0 / R_k respectively.
        assert!((form.w_eff - pump.annulus_width).abs() < 1e-12);
        assert!((form.k0_perp[0] + idler[0]).abs() < 1e-9);
        assert!((form.k0_perp[1] + idler[1]).abs() < 1e-9);
        assert!((form.r_k() - pump.cone_radius).abs() < 1e-8);
        assert!(form.r_k_squared > 0.0);
        // One more decade of crystal shrinkage buys two decades of collapse.
        let tighter = cas_closed_form(idler, &idx, 0.1, &pump, 0.4393);
        assert!((tighter.r_k() - pump.cone_radius).abs() < 1e-10);
    }

    #[test]
    fn cas_closed_form_w_eff_bounds() {
        // W_eff <= W always; equality exactly where a . k_hat = 0.
        let crystal = CrystalConfig::bbo_reference();
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let idx = derived_indices(&crystal, 406.8).unwrap();
        for angle in 0..16 {
            let t = angle as f64 * std::f64::consts::PI / 8.0;
            let idler = [0.485 * t.cos(), 0.485 * t.sin()];
            let form = cas_closed_form(idler, &idx, crystal.length, &pump, 0.4393);
            assert!(form.w_eff <= pump.annulus_width * (1.0 + 1e-12));
        }
        // Axis in the Y-Z plane: idler along x has a.k_hat = 0.
        let form = cas_closed_form([0.485, 0.0], &idx, crystal.length, &pump, 0.4393);
        assert_relative_eq!(form.w_eff, pump.annulus_width, max_relative = 1e-12);
    }

    #[test]
    fn pi_residual_limits() {
        let idx = derived_indices(&CrystalConfig::bbo_reference(), 406.8).unwrap();
        let kappa = 0.05;
        // Paraxial signal with the pair on the pump cone: residual -> 0.
        let ki = [0.0499, 0.0];
        let ks = [kappa - ki[0], 0.0];
        let r = pi_residual(ks, ki, &idx, kappa);
        assert!(r.abs() < 1e-8, "residual {r}");
        // Physical emission-cone pair: small against (k_perp_s)^2.
        let ki = [0.0, -0.485];
        for a in [0.0f64, 1.1, 2.7] {
            let ks = [-ki[0] + kappa * a.cos(), -ki[1] + kappa * a.sin()];
            let ks2 = ks[0] * ks[0] + ks[1] * ks[1];
            let rel = pi_residual(ks, ki, &idx, kappa).abs() / ks2;
            assert!(rel < 0.01, "relative residual {rel}");
        }
        // Experimental regime k_perp_s / |k_s| ~ 0.1.
        let shell = idx.emitted_shell();
        let ks = [0.9f64, 0.9];
        assert!((ks[0].hypot(ks[1]) / shell - 0.1).abs() < 0.01);
        let ki = [kappa - ks[0], -ks[1]];
        let rel = pi_residual(ks, ki, &idx, kappa).abs() / (ks[0] * ks[0] + ks[1] * ks[1]);
        assert!(rel < 0.01, "relative residual {rel}");
        // Off the cone the residual is nonzero with the matching sign.
        let ki = [0.0, -0.485];
        let out = [-ki[0] + 1.3 * kappa, -ki[1]];
        let inn = [-ki[0] + 0.7 * kappa, -ki[1]];
        assert!(pi_residual(out, ki, &idx, kappa) > 0.0);
        assert!(pi_residual(inn, ki, &idx, kappa) < 0.0);
    }
}
