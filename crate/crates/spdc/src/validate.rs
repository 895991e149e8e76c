//! The acceptance suite: every criterion of the build contract runs here at
//! its stated tolerance, shared between `spdc validate` and the
//! `tests/acceptance.rs` integration target.
//!
//! Heavy artifacts (full angular-spectrum maps, OAM matrices) are computed
//! once and shared across criteria through a process-wide cache; compute
//! cost is attributed to the first criterion that needs each artifact.

use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};
use std::time::Instant;

use crate::analysis::{self, fit_two_cones};
use crate::config::RunConfig;
use crate::crystal::{derived_indices, CrystalConfig, PumpBeam};
use crate::grid::SpectrumGrid;
use crate::oam::{
    amplitude_matrix, angular_factor, marginals, tilted_dispersion, tilted_frame,
    AmplitudeSettings, DispersionBranch, OamAmplitudeMatrix, TiltedBesselMode,
};
use crate::phasematch::GAMMA_DEFAULT;
use crate::spectra::{
    as_analytic, as_numeric, cas_closed_form, cas_numeric, cone_geometry, find_max, SpectrumMap,
};

/// Tolerances and targets fixed by the build contract, with their origin.
pub mod tolerances {
    /// Emission-cone radius target and window, 1/um (quoted measurement;
    /// the window absorbs Sellmeier-set variation).
    pub const R_AS_TARGET: f64 = 0.49;
    pub const R_AS_WINDOW: f64 = 0.05;
    /// Walk-off magnitude target and window, rad.
    pub const WALKOFF_TARGET: f64 = 0.068;
    pub const WALKOFF_WINDOW: f64 = 0.005;
    /// Quoted AS maximum for kappa = 0.05, 1/um (mirror-canonical k_x).
    pub const AS_PEAK: (f64, f64) = (0.027, -0.485);
    pub const AS_PEAK_RADIUS: f64 = 0.02;
    /// Quoted ridge-width window, 1/um.
    pub const WIDTH_WINDOW: (f64, f64) = (0.01, 0.03);
    /// Cone-fit agreement, relative.
    pub const CONE_FIT_REL: f64 = 0.25;
    /// Touch-point distance bound, 1/um.
    pub const TOUCH_RADIUS: f64 = 0.03;
    /// Analytic/numeric ridge-radius agreement, relative.
    pub const RIDGE_AGREEMENT_REL: f64 = 0.02;
    /// Analytic/numeric peak agreement, grid cells.
    pub const PEAK_CELLS: f64 = 2.0;
    /// Closed-form CAS collapse tolerance at L = 1 um, absolute in 1/um.
    pub const CAS_COLLAPSE_ABS: f64 = 1e-10;
    /// Untilted-reduction tolerance.
    pub const UNTILTED_ABS: f64 = 1e-12;
    /// Reflection-symmetry tolerance for |F|, relative.
    pub const REFLECTION_REL: f64 = 0.02;
    /// Window for the perpendicular-to-maximal orientation ratio.
    pub const PERP_RATIO: (f64, f64) = (0.35, 0.65);
    /// Required parity-oscillation window length, OAM cells.
    pub const OSCILLATION_CELLS: usize = 10;
    /// Quadrature-stability bound under doubling, relative.
    pub const DOUBLING_REL: f64 = 0.01;
    /// Noise floor for marginal-structure detection, fraction of unit sum.
    pub const MARGINAL_FLOOR: f64 = 1e-9;
}

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub number: u32,
    pub name: &'static str,
    pub passed: bool,
    pub budget_s: f64,
    pub elapsed_s: f64,
    pub details: Vec<String>,
}

impl CriterionReport {
    fn new(number: u32, name: &'static str, budget_s: f64) -> Self {
        CriterionReport {
            number,
            name,
            passed: true,
            budget_s,
            elapsed_s: 0.0,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.passed &= ok;
        self.details
            .push(format!("[{}] {detail}", if ok { "ok" } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("[--] {detail}"));
    }

    /// One line per criterion, as the suite prints it.
    pub fn line(&self) -> String {
        format!(
            "criterion {:2} {:<28} {}  ({:.1} s)",
            self.number,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.elapsed_s
        )
    }
}

/// Process-wide artifact cache for the suite.
pub struct Suite {
    as_maps: Mutex<HashMap<u32, Arc<SpectrumMap>>>,
    as_analytic_maps: Mutex<HashMap<u32, Arc<SpectrumGrid>>>,
    oam: Mutex<HashMap<&'static str, Arc<OamAmplitudeMatrix>>>,
}

static SUITE: LazyLock<Suite> = LazyLock::new(|| Suite {
    as_maps: Mutex::new(HashMap::new()),
    as_analytic_maps: Mutex::new(HashMap::new()),
    oam: Mutex::new(HashMap::new()),
});

fn kappa_key(kappa: f64) -> u32 {
    (kappa * 1000.0).round() as u32
}

fn reference_pump(kappa: f64) -> PumpBeam {
    PumpBeam::new(406.8, kappa, 0.0007, 0)
}

impl Suite {
    pub fn get() -> &'static Suite {
        &SUITE
    }

    /// Numeric AS at the reference configuration for a given pump cone
    /// radius; default grid and quadrature.
    pub fn as_map(&self, kappa: f64) -> Arc<SpectrumMap> {
        let key = kappa_key(kappa);
        if let Some(m) = self.as_maps.lock().unwrap().get(&key) {
            return m.clone();
        }
        let config = RunConfig::reference();
        let map = as_numeric(
            &config.grid.template(),
            &config.crystal,
            &reference_pump(kappa),
            &config.quad,
            &config.envelope,
        )
        .expect("reference AS map");
        let arc = Arc::new(map);
        self.as_maps.lock().unwrap().insert(key, arc.clone());
        arc
    }

    pub fn as_analytic_map(&self, kappa: f64) -> Arc<SpectrumGrid> {
        let key = kappa_key(kappa);
        if let Some(m) = self.as_analytic_maps.lock().unwrap().get(&key) {
            return m.clone();
        }
        let config = RunConfig::reference();
        let grid = as_analytic(
            &config.grid.template(),
            &config.crystal,
            &reference_pump(kappa),
            config.quad.azimuthal_points,
            config.envelope.gamma,
        )
        .expect("reference analytic AS map");
        let arc = Arc::new(grid);
        self.as_analytic_maps
            .lock()
            .unwrap()
            .insert(key, arc.clone());
        arc
    }

    fn oam_modes(
        kappa_signal: f64,
        kappa_idler: f64,
        phi_signal: f64,
        phi_idler: f64,
    ) -> (TiltedBesselMode, TiltedBesselMode) {
        let config = RunConfig::reference();
        let cone = cone_geometry(&config.crystal, &config.pump, GAMMA_DEFAULT).unwrap();
        let theta = cone.emission_tilt;
        let make = |kappa, phi| TiltedBesselMode {
            frame: tilted_frame(theta, phi),
            kappa_perp: kappa,
            ell: 0,
            width: 0.0005,
            wavelength_nm: 2.0 * 406.8,
        };
        (make(kappa_signal, phi_signal), make(kappa_idler, phi_idler))
    }

    /// Paraxial-family OAM matrix (kappa_p = 0.01) in the maximal-CAS
    /// orientation over the given range, or the perpendicular orientation.
    pub fn oam_matrix(&self, which: &'static str) -> Arc<OamAmplitudeMatrix> {
        if let Some(m) = self.oam.lock().unwrap().get(which) {
            return m.clone();
        }
        let config = RunConfig::reference();
        let pump = PumpBeam::new(406.8, 0.01, 0.0005, 0);
        use std::f64::consts::{FRAC_PI_2, PI};
        let (range, phis): ((i32, i32), (f64, f64)) = match which {
            "paraxial" => ((-5, 5), (-FRAC_PI_2, FRAC_PI_2)),
            "perpendicular" => ((-5, 5), (0.0, PI)),
            "marginal" => ((-15, 15), (-FRAC_PI_2, FRAC_PI_2)),
            other => panic!("unknown OAM matrix key {other}"),
        };
        let (signal, idler) = Self::oam_modes(1e-4, 0.01, phis.0, phis.1);
        let settings = AmplitudeSettings {
            phi_points: 128,
            both_branches: true,
            rel_tol: 1e-2,
        };
        let m = amplitude_matrix(
            &pump,
            &signal,
            &idler,
            &config.crystal,
            &config.envelope,
            &settings,
            range,
            range,
        )
        .expect("OAM matrix");
        let arc = Arc::new(m);
        self.oam.lock().unwrap().insert(which, arc.clone());
        arc
    }
}

/// Criterion 1: emission-cone radius reported by `indices`.
pub fn criterion_1() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(1, "cone radius", 1.0);
    let config = RunConfig::reference();
    let cone = cone_geometry(&config.crystal, &config.pump, config.envelope.gamma).unwrap();
    rep.check(
        (cone.r_as - tolerances::R_AS_TARGET).abs() <= tolerances::R_AS_WINDOW,
        format!(
            "r_AS = {:.4} 1/um vs {} +- {}",
            cone.r_as,
            tolerances::R_AS_TARGET,
            tolerances::R_AS_WINDOW
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.3} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 2: walk-off magnitude.
pub fn criterion_2() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(2, "walk-off", 1.0);
    let config = RunConfig::reference();
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm).unwrap();
    let walkoff = (idx.beta * idx.axis[1]).abs();
    rep.check(
        (walkoff - tolerances::WALKOFF_TARGET).abs() <= tolerances::WALKOFF_WINDOW,
        format!(
            "|beta a_y| = {:.5} rad vs {} +- {}",
            walkoff,
            tolerances::WALKOFF_TARGET,
            tolerances::WALKOFF_WINDOW
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.3} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 3: AS structure at kappa = 0.05 (peak location, single
/// asymmetric ring, azimuth-dependent ridge width window).
pub fn criterion_3() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(3, "AS structure k=0.05", 600.0);
    let map = Suite::get().as_map(0.05);
    let (px, py, _) = analysis::canonical_peak(&map.grid).unwrap();
    let dist = (px - tolerances::AS_PEAK.0).hypot(py - tolerances::AS_PEAK.1);
    rep.check(
        dist <= tolerances::AS_PEAK_RADIUS,
        format!(
            "global max (|kx|, ky) = ({px:.4}, {py:.4}) is {dist:.4} 1/um from ({}, {}) (tol {})",
            tolerances::AS_PEAK.0,
            tolerances::AS_PEAK.1,
            tolerances::AS_PEAK_RADIUS
        ),
    );
    let stats = analysis::ring_stats(&map.grid, [0.0, 0.0], 0.3, 0.685, 72, 600).unwrap();
    // Single ring: each ray crosses one connected above-half-max interval
    // around a ridge radius that stays within the map.
    let single_ring = stats.rays.len() == 72;
    rep.check(
        single_ring,
        format!("ridge found on {} / 72 azimuths", stats.rays.len()),
    );
    let spread = stats
        .rays
        .iter()
        .map(|r| r.1)
        .fold((f64::INFINITY, 0.0f64), |acc, r| (acc.0.min(r), acc.1.max(r)));
    rep.note(format!(
        "ridge radius spread [{:.4}, {:.4}], mass-mean {:.4}",
        spread.0, spread.1, stats.mass_mean_radius
    ));
    let (lo, hi) = tolerances::WIDTH_WINDOW;
    rep.check(
        stats.min_width >= lo && stats.max_width <= hi,
        format!(
            "azimuthal ridge FWHM range [{:.4}, {:.4}] 1/um vs required [{lo}, {hi}]",
            stats.min_width, stats.max_width
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 4: double-cone regime at kappa in {0.09, 0.15}.
pub fn criterion_4() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(4, "double-cone regime", 1200.0);
    // The displaced-cone formulas are printed in the convention with the
    // optical axis at azimuth +90 deg; the maps use the measurement
    // orientation (-90 deg). Radii and center displacements are compared as
    // magnitudes, displacements against the formula cone radius.
    let printed = CrystalConfig {
        axis_azimuth: std::f64::consts::FRAC_PI_2,
        ..CrystalConfig::bbo_reference()
    };
    for kappa in [0.09, 0.15] {
        let map = Suite::get().as_map(kappa);
        let cone = cone_geometry(&printed, &reference_pump(kappa), GAMMA_DEFAULT).unwrap();
        let fit = fit_two_cones(&map.grid, 0.2, 0.69, 96, 700, 0.25).unwrap();
        let (formula_big, formula_small) = if cone.r_plus >= cone.r_minus {
            ((cone.r_plus, cone.a_plus), (cone.r_minus, cone.a_minus))
        } else {
            ((cone.r_minus, cone.a_minus), (cone.r_plus, cone.a_plus))
        };
        let rel = |fitted: f64, formula: f64| (fitted - formula).abs() / formula.abs();
        rep.check(
            rel(fit.outer.1, formula_big.0) <= tolerances::CONE_FIT_REL,
            format!(
                "k={kappa}: outer radius {:.4} vs formula {:.4} ({:.1}%)",
                fit.outer.1,
                formula_big.0,
                100.0 * rel(fit.outer.1, formula_big.0)
            ),
        );
        rep.check(
            rel(fit.inner.1, formula_small.0) <= tolerances::CONE_FIT_REL,
            format!(
                "k={kappa}: inner radius {:.4} vs formula {:.4} ({:.1}%)",
                fit.inner.1,
                formula_small.0,
                100.0 * rel(fit.inner.1, formula_small.0)
            ),
        );
        let center_big = (fit.outer.0.abs() - formula_big.1.abs()).abs();
        let center_small = (fit.inner.0.abs() - formula_small.1.abs()).abs();
        rep.check(
            center_big <= tolerances::CONE_FIT_REL * formula_big.0,
            format!(
                "k={kappa}: outer |center| {:.4} vs formula {:.4} (diff {:.4} <= 25% of R)",
                fit.outer.0.abs(),
                formula_big.1.abs(),
                center_big
            ),
        );
        rep.check(
            center_small <= tolerances::CONE_FIT_REL * formula_small.0,
            format!(
                "k={kappa}: inner |center| {:.4} vs formula {:.4} (diff {:.4} <= 25% of R)",
                fit.inner.0.abs(),
                formula_small.1.abs(),
                center_small
            ),
        );
        let touch = fit.touch_point();
        let target = [0.0, -cone.r_as + kappa / 2.0];
        let dist = (touch[0] - target[0]).hypot(touch[1] - target[1]);
        rep.check(
            dist <= tolerances::TOUCH_RADIUS,
            format!(
                "k={kappa}: touch point (0, {:.4}) is {dist:.4} 1/um from (0, {:.4}) (tol {})",
                touch[1],
                target[1],
                tolerances::TOUCH_RADIUS
            ),
        );
    }
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 5: analytic/numeric cross-oracle for kappa <= 0.15.
pub fn criterion_5() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(5, "analytic/numeric agreement", 900.0);
    for kappa in [0.05, 0.09, 0.15] {
        let numeric = Suite::get().as_map(kappa);
        let analytic = Suite::get().as_analytic_map(kappa);
        let sn = analysis::ring_stats(&numeric.grid, [0.0, 0.0], 0.3, 0.685, 72, 600).unwrap();
        let sa = analysis::ring_stats(&analytic, [0.0, 0.0], 0.3, 0.685, 72, 600).unwrap();
        let rel = (sn.mass_mean_radius - sa.mass_mean_radius).abs() / sa.mass_mean_radius;
        rep.check(
            rel <= tolerances::RIDGE_AGREEMENT_REL,
            format!(
                "k={kappa}: ridge radius numeric {:.4} vs analytic {:.4} ({:.2}%)",
                sn.mass_mean_radius,
                sa.mass_mean_radius,
                100.0 * rel
            ),
        );
        let pn = analysis::canonical_peak(&numeric.grid).unwrap();
        let pa = analysis::canonical_peak(&analytic).unwrap();
        let cells = analysis::distance_in_cells(&numeric.grid, (pn.0, pn.1), (pa.0, pa.1));
        rep.check(
            cells <= tolerances::PEAK_CELLS + 1e-9,
            format!(
                "k={kappa}: peak numeric ({:.4}, {:.4}) vs analytic ({:.4}, {:.4}): {cells:.2} cells",
                pn.0, pn.1, pa.0, pa.1
            ),
        );
    }
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 6: CAS ring at the auto-selected idler plus the closed-form
/// short-crystal collapse.
pub fn criterion_6() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(6, "CAS ring", 300.0);
    let config = RunConfig::reference();
    let as_map = Suite::get().as_map(0.05);
    let (ix, iy, _) = find_max(&as_map.grid).unwrap();
    rep.note(format!("auto-selected idler ({ix:.4}, {iy:.4}) 1/um"));
    let idler = [ix, iy];
    // Zoomed grid: the ring width ~W is far below the survey-grid cell.
    let template = SpectrumGrid::zeros_about(512, [-ix, -iy], 0.12);
    let map = cas_numeric(&template, idler, &config.crystal, &config.pump, &config.envelope)
        .unwrap();
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm).unwrap();
    let form = cas_closed_form(idler, &idx, config.crystal.length, &config.pump, GAMMA_DEFAULT);
    let stats =
        analysis::ring_stats(&map.grid, [-ix, -iy], 0.01, 0.1, 72, 900).unwrap();
    let kappa = config.pump.cone_radius;
    rep.check(
        (stats.mean_ridge_radius - kappa).abs() <= 2.0 * form.w_eff,
        format!(
            "ring radius {:.5} vs kappa {:.5} within 2 W_eff = {:.5}",
            stats.mean_ridge_radius,
            kappa,
            2.0 * form.w_eff
        ),
    );
    let w = config.pump.annulus_width;
    let mean_width = stats
        .rays
        .iter()
        .map(|r| r.3)
        .sum::<f64>()
        / stats.rays.len() as f64;
    rep.check(
        mean_width >= 0.5 * w && mean_width <= 2.0 * w,
        format!("ring FWHM {:.6} within a factor 2 of W = {w}", mean_width),
    );
    // Closed-form collapse at L = 1 um.
    let short = cas_closed_form(idler, &idx, 1.0, &config.pump, GAMMA_DEFAULT);
    let t = tolerances::CAS_COLLAPSE_ABS;
    rep.check(
        (short.w_eff - w).abs() <= t,
        format!("L=1um: |W_eff - W| = {:.2e} <= {t:.0e}", (short.w_eff - w).abs()),
    );
    let k0_shift = (short.k0_perp[0] + idler[0]).hypot(short.k0_perp[1] + idler[1]);
    rep.check(
        k0_shift <= t,
        format!("L=1um: |K0 + ki| = {k0_shift:.2e} <= {t:.0e}"),
    );
    rep.check(
        (short.r_k() - kappa).abs() <= t,
        format!(
            "L=1um: |R_k - kappa| = {:.2e} <= {t:.0e}",
            (short.r_k() - kappa).abs()
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 7: AS and CAS outputs are bit-identical across pump OAM
/// indices (only the pump modulus enters the rates).
pub fn criterion_7() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(7, "pump-OAM invariance", 300.0);
    let config = RunConfig::reference();
    // Same machinery as criterion 3 at reduced resolution; the code path is
    // index-independent by construction, the check pins it bitwise.
    let template = SpectrumGrid::zeros_centered(128, 0.7);
    let quad = config.quad;
    let pm = config.envelope;
    let p0 = PumpBeam::new(406.8, 0.05, 0.0007, 0);
    let p3 = PumpBeam::new(406.8, 0.05, 0.0007, 3);
    let m0 = as_numeric(&template, &config.crystal, &p0, &quad, &pm).unwrap();
    let m3 = as_numeric(&template, &config.crystal, &p3, &quad, &pm).unwrap();
    rep.check(
        m0.grid.values == m3.grid.values,
        "AS maps bit-identical for pump OAM 0 and 3".to_string(),
    );
    let (ix, iy, _) = find_max(&m0.grid).unwrap();
    let cas_template = SpectrumGrid::zeros_about(256, [-ix, -iy], 0.12);
    let c0 = cas_numeric(&cas_template, [ix, iy], &config.crystal, &p0, &pm).unwrap();
    let c3 = cas_numeric(&cas_template, [ix, iy], &config.crystal, &p3, &pm).unwrap();
    rep.check(
        c0.grid.values == c3.grid.values,
        "CAS maps bit-identical for pump OAM 0 and 3".to_string(),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 8: untilted reductions of the tilted-mode machinery over a
/// 1000-point random sweep at 1e-12.
pub fn criterion_8() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(8, "tilted-mode reductions", 10.0);
    let config = RunConfig::reference();
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm).unwrap();
    let n_o = idx.n_o_signal;
    let k0m = idx.k0 / 2.0;
    let shell = n_o * k0m;
    let mut state = 0x5deece66du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut worst_angular = 0.0f64;
    let mut worst_kz = 0.0f64;
    let mut worst_kperp = 0.0f64;
    let mut worst_jac = 0.0f64;
    for _ in 0..1000 {
        let phi = next() * 2.0 * std::f64::consts::PI;
        let pt = (next() - 0.5) * 2.0 * std::f64::consts::PI;
        let ell = ((next() * 31.0) as i32) - 15;
        let kperp = 0.05 + next() * 0.6;
        let kz = (shell * shell - kperp * kperp).sqrt();
        let f = angular_factor(ell, 0.0, pt, phi, kz, kperp);
        let expect = num_complex::Complex64::from_polar(1.0, ell as f64 * (phi - pt));
        worst_angular = worst_angular.max((f - expect).norm());
        let kappa = 0.05 + next() * 0.6;
        let d = tilted_dispersion(kappa, n_o, k0m, phi, 0.0, pt, DispersionBranch::Plus);
        worst_kz = worst_kz.max((d.kz - (shell * shell - kappa * kappa).sqrt()).abs() / shell);
        worst_kperp = worst_kperp.max((d.kperp - kappa).abs() / kappa);
        worst_jac = worst_jac.max((d.jacobian - 1.0).abs());
    }
    let t = tolerances::UNTILTED_ABS;
    rep.check(
        worst_angular <= t,
        format!("angular factor vs exp(i l (phi-pt)): worst |diff| = {worst_angular:.2e} <= {t:.0e}"),
    );
    rep.check(
        worst_kz <= t,
        format!("K_z vs untilted shell: worst rel diff = {worst_kz:.2e} <= {t:.0e}"),
    );
    rep.check(
        worst_kperp <= 1e-10,
        format!("K_perp vs kappa: worst rel diff = {worst_kperp:.2e} <= 1e-10"),
    );
    rep.check(
        worst_jac <= 1e-10,
        format!("on-shell Jacobian vs 1: worst |diff| = {worst_jac:.2e} <= 1e-10"),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.2} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 9: paraxial OAM family (argmax, reflection symmetry,
/// perpendicular-orientation ratio).
pub fn criterion_9() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(9, "OAM matrix paraxial family", 1800.0);
    let m = Suite::get().oam_matrix("paraxial");
    let mut best = (0i32, 0i32, 0.0f64);
    for ls in m.ell_s_min..=m.ell_s_max {
        for li in m.ell_i_min..=m.ell_i_max {
            let v = m.at(ls, li).norm();
            if v > best.2 {
                best = (ls, li, v);
            }
        }
    }
    rep.check(
        best.0 == 0 && best.1 == 0,
        format!("argmax |F| at (l_s, l_i) = ({}, {})", best.0, best.1),
    );
    let mut worst_reflection = 0.0f64;
    for ls in m.ell_s_min..=m.ell_s_max {
        for li in m.ell_i_min..=m.ell_i_max {
            let a = m.at(ls, li).norm();
            let b = m.at(-ls, -li).norm();
            let scale = a.max(b);
            if scale > 1e-9 * best.2 {
                worst_reflection = worst_reflection.max((a - b).abs() / scale);
            }
        }
    }
    rep.check(
        worst_reflection <= tolerances::REFLECTION_REL,
        format!(
            "reflection symmetry |F(l)| vs |F(-l)|: worst rel diff {:.2e} <= {}",
            worst_reflection,
            tolerances::REFLECTION_REL
        ),
    );
    let perp = Suite::get().oam_matrix("perpendicular");
    let ratio = perp.max_abs() / m.max_abs();
    let (lo, hi) = tolerances::PERP_RATIO;
    rep.check(
        ratio >= lo && ratio <= hi,
        format!("perpendicular/maximal orientation max ratio = {ratio:.3} vs [{lo}, {hi}]"),
    );
    rep.check(
        m.doubling_rel_change <= tolerances::DOUBLING_REL,
        format!(
            "azimuthal-grid doubling changes |F| by {:.2e} <= {}",
            m.doubling_rel_change,
            tolerances::DOUBLING_REL
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Longest run of consecutive indices over which successive differences
/// alternate in sign and all values stay above `floor`. Returned in cells
/// (diff count + 1).
fn oscillation_window(values: &[f64], floor: f64) -> usize {
    let mut best = 0usize;
    let mut run = 1usize;
    let mut prev_sign = 0i8;
    for i in 1..values.len() {
        let above = values[i] > floor && values[i - 1] > floor;
        let d = values[i] - values[i - 1];
        let sign = if d > 0.0 { 1 } else { -1 };
        if above && (prev_sign == 0 || sign == -prev_sign) {
            run += 1;
            prev_sign = sign;
        } else {
            best = best.max(run);
            run = if above { 2 } else { 1 };
            prev_sign = if above { sign } else { 0 };
        }
    }
    best.max(run)
}

/// Criterion 10: marginal parity structure over l in [-15, 15].
pub fn criterion_10() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(10, "marginal parity structure", 2700.0);
    let m = Suite::get().oam_matrix("marginal");
    let (m_s, m_i) = marginals(&m).unwrap();
    let sum_s: f64 = m_s.iter().sum();
    let sum_i: f64 = m_i.iter().sum();
    rep.check(
        (sum_s - 1.0).abs() < 1e-12 && (sum_i - 1.0).abs() < 1e-12,
        format!("marginals normalized: sums {sum_s:.15}, {sum_i:.15}"),
    );
    let floor = tolerances::MARGINAL_FLOOR;
    let idler_window = oscillation_window(&m_i, floor);
    let signal_window = oscillation_window(&m_s, floor);
    rep.note(format!(
        "idler marginal around l=0: {:?}",
        &m_i[12..=18]
            .iter()
            .map(|v| format!("{v:.3e}"))
            .collect::<Vec<_>>()
    ));
    rep.check(
        idler_window >= tolerances::OSCILLATION_CELLS,
        format!(
            "idler parity-oscillation window {idler_window} cells >= {}",
            tolerances::OSCILLATION_CELLS
        ),
    );
    rep.check(
        signal_window < idler_window,
        format!("signal window {signal_window} strictly smaller than idler window {idler_window}"),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Criterion 11: determinism across worker counts and quadrature stability
/// of the acceptance scalars under Richardson doubling.
pub fn criterion_11() -> CriterionReport {
    let start = Instant::now();
    let mut rep = CriterionReport::new(11, "determinism + stability", 1800.0);
    let config = RunConfig::reference();
    // Worker-count determinism on a reduced map (same code path).
    let template = SpectrumGrid::zeros_centered(64, 0.7);
    let quad = crate::quad::QuadratureSpec {
        radial_points: 16,
        azimuthal_points: 64,
        rel_tol: 1e-2,
        max_doublings: 1,
    };
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool4 = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let crystal = config.crystal.clone();
    let pump = config.pump.clone();
    let pm = config.envelope;
    let a = pool1
        .install(|| as_numeric(&template, &crystal, &pump, &quad, &pm))
        .unwrap();
    let b = pool4
        .install(|| as_numeric(&template, &crystal, &pump, &quad, &pm))
        .unwrap();
    rep.check(
        a.grid.values == b.grid.values,
        "AS map bit-identical for 1 vs 4 workers".to_string(),
    );
    // Doubling stability of the acceptance scalars: every map carries its
    // first-pass grid; extract the scalars from both quadrature levels.
    for kappa in [0.05, 0.09, 0.15] {
        let map = Suite::get().as_map(kappa);
        let fine = analysis::ring_stats(&map.grid, [0.0, 0.0], 0.3, 0.685, 72, 600).unwrap();
        let coarse = analysis::ring_stats(&map.coarse, [0.0, 0.0], 0.3, 0.685, 72, 600).unwrap();
        let radius_change =
            (fine.mass_mean_radius - coarse.mass_mean_radius).abs() / fine.mass_mean_radius;
        rep.check(
            radius_change <= tolerances::DOUBLING_REL,
            format!("k={kappa}: ridge radius doubling change {radius_change:.2e} <= 1e-2"),
        );
        let (_, _, pv_f) = find_max(&map.grid).unwrap();
        let (_, _, pv_c) = find_max(&map.coarse).unwrap();
        let peak_change = (pv_f - pv_c).abs() / pv_f;
        rep.check(
            peak_change <= tolerances::DOUBLING_REL,
            format!("k={kappa}: peak value doubling change {peak_change:.2e} <= 1e-2"),
        );
        let cell_change = map.max_doubling_change();
        rep.check(
            cell_change <= tolerances::DOUBLING_REL,
            format!("k={kappa}: worst per-cell doubling change {cell_change:.2e} <= 1e-2"),
        );
    }
    let m = Suite::get().oam_matrix("paraxial");
    rep.check(
        m.doubling_rel_change <= tolerances::DOUBLING_REL,
        format!(
            "OAM |F| doubling change {:.2e} <= 1e-2",
            m.doubling_rel_change
        ),
    );
    rep.elapsed_s = start.elapsed().as_secs_f64();
    rep.check(rep.elapsed_s < rep.budget_s, format!("runtime {:.1} s < {} s", rep.elapsed_s, rep.budget_s));
    rep
}

/// Run the requested criteria (all by default), printing one line each.
pub fn run_all(filter: Option<&[u32]>) -> Vec<CriterionReport> {
    let runners: [(u32, fn() -> CriterionReport); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut out = Vec::new();
    for (n, f) in runners {
        if let Some(list) = filter {
            if !list.contains(&n) {
                continue;
            }
        }
        let rep = f();
        println!("{}", rep.line());
        for d in &rep.details {
            println!("    {d}");
        }
        out.push(rep);
    }
    out
}
