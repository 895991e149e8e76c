//! Command implementations behind the `spdc` binary: each returns a
//! [`RunSummary`] after writing its artifacts, so the thin front end only
//! parses arguments and maps errors to exit codes.

use std::path::{Path, PathBuf};

use crate::analysis;
use crate::config::{parse_config, serialize_config, RunConfig};
use crate::crystal::derived_indices;
use crate::error::{Result, SpdcError};
use crate::formats::{
    write_grid, write_heatmap, write_marginal, write_oam_matrix, ConvergenceReport, HeatmapScale,
    RunSummary,
};
use crate::oam::{amplitude_matrix, marginals, tilted_frame, AmplitudeSettings, TiltedBesselMode};
use crate::spectra::{
    as_analytic, as_numeric, cas_analytic, cas_numeric, cone_geometry, find_max, CellIssue,
    SpectrumMap,
};

/// Which implementations of a map to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Numeric,
    Analytic,
    Both,
}

impl MapKind {
    fn numeric(&self) -> bool {
        matches!(self, MapKind::Numeric | MapKind::Both)
    }

    fn analytic(&self) -> bool {
        matches!(self, MapKind::Analytic | MapKind::Both)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn convergence_of(map: &SpectrumMap) -> ConvergenceReport {
    let unconverged = map
        .issues
        .iter()
        .filter(|i| matches!(i, CellIssue::Unconverged { .. }))
        .count();
    let domain = map.issues.len() - unconverged;
    ConvergenceReport {
        converged_fraction: map.converged_fraction(),
        unconverged_cells: unconverged,
        domain_flagged_cells: domain,
        max_doubling_change: map.max_doubling_change(),
    }
}

/// `indices`: derived indices and the emission-cone geometry report.
pub fn run_indices(config: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    ensure_dir(out_dir)?;
    let mut summary = RunSummary::new("indices", serialize_config(config));
    summary.warnings = config.validate()?;
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm)?;
    let cone = cone_geometry(&config.crystal, &config.pump, config.envelope.gamma)?;
    summary.warnings.extend(cone.warnings.iter().cloned());
    let s = &mut summary.scalars;
    s.insert("n_o_pump".into(), idx.n_o_pump);
    s.insert("n_e_pump".into(), idx.n_e_pump);
    s.insert("n_o_signal".into(), idx.n_o_signal);
    s.insert("n_eff".into(), idx.n_eff);
    s.insert("beta".into(), idx.beta);
    s.insert("eta".into(), idx.eta);
    s.insert("walkoff".into(), (idx.beta * idx.axis[1]).abs());
    s.insert("r_as".into(), cone.r_as);
    s.insert("sigma_as".into(), cone.sigma_as);
    s.insert("r_plus".into(), cone.r_plus);
    s.insert("r_minus".into(), cone.r_minus);
    s.insert("a_plus".into(), cone.a_plus);
    s.insert("a_minus".into(), cone.a_minus);
    s.insert("theta_ec".into(), cone.emission_tilt);
    let path = out_dir.join("summary.json");
    summary.write(&path)?;
    summary.artifacts.push(path.display().to_string());
    Ok(summary)
}

fn emit_map(
    tag: &str,
    grid: &crate::grid::SpectrumGrid,
    out_dir: &Path,
    scale: HeatmapScale,
    summary: &mut RunSummary,
) -> Result<()> {
    let kgrid = out_dir.join(format!("{tag}.kgrid"));
    write_grid(grid, &kgrid)?;
    summary.artifacts.push(kgrid.display().to_string());
    let pgm = out_dir.join(format!("{tag}.pgm"));
    if let Some(w) = write_heatmap(grid, &pgm, scale)? {
        summary.warnings.push(w);
    }
    summary.artifacts.push(pgm.display().to_string());
    Ok(())
}

/// `as`: angular spectrum, numeric and/or analytic.
pub fn run_as(
    config: &RunConfig,
    out_dir: &Path,
    kind: MapKind,
    scale: HeatmapScale,
) -> Result<RunSummary> {
    ensure_dir(out_dir)?;
    let mut summary = RunSummary::new("as", serialize_config(config));
    summary.warnings = config.validate()?;
    let template = config.grid.template();
    if kind.numeric() {
        let map = as_numeric(
            &template,
            &config.crystal,
            &config.pump,
            &config.quad,
            &config.envelope,
        )?;
        summary.convergence = convergence_of(&map);
        emit_map("as_numeric", &map.grid, out_dir, scale, &mut summary)?;
        let (px, py, pv) = find_max(&map.grid)?;
        summary.scalars.insert("numeric_peak_kx".into(), px);
        summary.scalars.insert("numeric_peak_ky".into(), py);
        summary.scalars.insert("numeric_peak_value".into(), pv);
        if let Ok(stats) =
            analysis::ring_stats(&map.grid, [0.0, 0.0], 0.1, 0.98 * template.kx_max, 72, 600)
        {
            summary
                .scalars
                .insert("numeric_ridge_radius".into(), stats.mass_mean_radius);
            summary.scalars.insert("numeric_min_width".into(), stats.min_width);
            summary.scalars.insert("numeric_max_width".into(), stats.max_width);
        }
    }
    if kind.analytic() {
        let grid = as_analytic(
            &template,
            &config.crystal,
            &config.pump,
            config.quad.azimuthal_points,
            config.envelope.gamma,
        )?;
        emit_map("as_analytic", &grid, out_dir, scale, &mut summary)?;
        let (px, py, pv) = find_max(&grid)?;
        summary.scalars.insert("analytic_peak_kx".into(), px);
        summary.scalars.insert("analytic_peak_ky".into(), py);
        summary.scalars.insert("analytic_peak_value".into(), pv);
        if let Ok(stats) =
            analysis::ring_stats(&grid, [0.0, 0.0], 0.1, 0.98 * template.kx_max, 72, 600)
        {
            summary
                .scalars
                .insert("analytic_ridge_radius".into(), stats.mass_mean_radius);
        }
    }
    let path = out_dir.join("summary.json");
    summary.write(&path)?;
    summary.artifacts.push(path.display().to_string());
    Ok(summary)
}

/// `cas`: conditional angular spectrum at the configured idler, or at the
/// maximum of a freshly computed AS when `auto_idler` is set.
pub fn run_cas(
    config: &RunConfig,
    out_dir: &Path,
    kind: MapKind,
    scale: HeatmapScale,
    auto_idler: bool,
) -> Result<RunSummary> {
    ensure_dir(out_dir)?;
    let mut summary = RunSummary::new("cas", serialize_config(config));
    summary.warnings = config.validate()?;
    let idler = if auto_idler {
        let template = config.grid.template();
        let map = as_numeric(
            &template,
            &config.crystal,
            &config.pump,
            &config.quad,
            &config.envelope,
        )?;
        let (kx, ky, _) = find_max(&map.grid)?;
        summary.warnings.push(format!(
            "auto-selected idler from the AS maximum: ({kx}, {ky}) 1/um"
        ));
        [kx, ky]
    } else {
        config.cas.idler.ok_or_else(|| {
            SpdcError::invalid(
                "cas",
                "no idler configured; set cas.idler_kx/cas.idler_ky or pass --auto-idler",
            )
        })?
    };
    summary.scalars.insert("idler_kx".into(), idler[0]);
    summary.scalars.insert("idler_ky".into(), idler[1]);
    let template = config.cas.template(idler, &config.grid);
    if kind.numeric() {
        let map = cas_numeric(
            &template,
            idler,
            &config.crystal,
            &config.pump,
            &config.envelope,
        )?;
        summary.convergence = convergence_of(&map);
        emit_map("cas_numeric", &map.grid, out_dir, scale, &mut summary)?;
        if let Ok(stats) = analysis::ring_stats(
            &map.grid,
            [-idler[0], -idler[1]],
            0.2 * config.pump.cone_radius.max(1e-3),
            2.0 * config.pump.cone_radius.max(1e-3),
            72,
            800,
        ) {
            summary
                .scalars
                .insert("ring_radius".into(), stats.mean_ridge_radius);
            summary.scalars.insert("ring_width_min".into(), stats.min_width);
            summary.scalars.insert("ring_width_max".into(), stats.max_width);
        }
    }
    if kind.analytic() {
        let (grid, form) = cas_analytic(
            &template,
            idler,
            &config.crystal,
            &config.pump,
            config.envelope.gamma,
        )?;
        emit_map("cas_analytic", &grid, out_dir, scale, &mut summary)?;
        summary.scalars.insert("w_eff".into(), form.w_eff);
        summary.scalars.insert("k0_perp_x".into(), form.k0_perp[0]);
        summary.scalars.insert("k0_perp_y".into(), form.k0_perp[1]);
        summary.scalars.insert("r_k_squared".into(), form.r_k_squared);
        summary.scalars.insert("r_k".into(), form.r_k());
    }
    let path = out_dir.join("summary.json");
    summary.write(&path)?;
    summary.artifacts.push(path.display().to_string());
    Ok(summary)
}

/// `oam`: amplitude matrix over the configured index ranges plus marginals.
pub fn run_oam(config: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    ensure_dir(out_dir)?;
    let mut summary = RunSummary::new("oam", serialize_config(config));
    summary.warnings = config.validate()?;
    let o = &config.oam;
    let emitted_nm = 2.0 * config.pump.wavelength_nm;
    let signal = TiltedBesselMode {
        frame: tilted_frame(o.theta, o.phi_signal),
        kappa_perp: o.kappa_signal,
        ell: 0,
        width: o.mode_width,
        wavelength_nm: emitted_nm,
    };
    let idler = TiltedBesselMode {
        frame: tilted_frame(o.theta, o.phi_idler),
        kappa_perp: o.kappa_idler,
        ell: 0,
        width: o.mode_width,
        wavelength_nm: emitted_nm,
    };
    let settings = AmplitudeSettings::from_quadrature(&config.quad);
    let matrix = amplitude_matrix(
        &config.pump,
        &signal,
        &idler,
        &config.crystal,
        &config.envelope,
        &settings,
        o.ell_signal,
        o.ell_idler,
    )?;
    let koam = out_dir.join("oam_matrix.koam");
    write_oam_matrix(&matrix, &koam)?;
    summary.artifacts.push(koam.display().to_string());
    // Quick-look: |F| as a graymap over the index plane.
    let mut grid = crate::grid::SpectrumGrid::zeros(
        matrix.cols(),
        matrix.rows(),
        (o.ell_idler.0 as f64 - 0.5, o.ell_idler.1 as f64 + 0.5),
        (o.ell_signal.0 as f64 - 0.5, o.ell_signal.1 as f64 + 0.5),
    );
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            // Image row 0 = largest ell_s.
            let src = (matrix.rows() - 1 - r) * matrix.cols() + c;
            grid.values[r * matrix.cols() + c] = matrix.amplitudes[src].norm();
        }
    }
    let pgm = out_dir.join("oam_matrix.pgm");
    if let Some(w) = write_heatmap(&grid, &pgm, HeatmapScale::Linear)? {
        summary.warnings.push(w);
    }
    summary.artifacts.push(pgm.display().to_string());
    let (m_s, m_i) = marginals(&matrix)?;
    let ms_path = out_dir.join("marginal_signal.tsv");
    let mi_path = out_dir.join("marginal_idler.tsv");
    write_marginal(matrix.ell_s_min, &m_s, &ms_path)?;
    write_marginal(matrix.ell_i_min, &m_i, &mi_path)?;
    summary.artifacts.push(ms_path.display().to_string());
    summary.artifacts.push(mi_path.display().to_string());
    // Argmax cell and the stability of the quadrature.
    let mut best = (0usize, 0.0f64);
    for (i, a) in matrix.amplitudes.iter().enumerate() {
        if a.norm() > best.1 {
            best = (i, a.norm());
        }
    }
    let ls = matrix.ell_s_min + (best.0 / matrix.cols()) as i32;
    let li = matrix.ell_i_min + (best.0 % matrix.cols()) as i32;
    summary.scalars.insert("argmax_ell_signal".into(), ls as f64);
    summary.scalars.insert("argmax_ell_idler".into(), li as f64);
    summary.scalars.insert("max_abs_f".into(), best.1);
    summary.convergence.max_doubling_change = matrix.doubling_rel_change;
    let path = out_dir.join("summary.json");
    summary.write(&path)?;
    summary.artifacts.push(path.display().to_string());
    Ok(summary)
}

/// `sweep`: cartesian product over the configured parameter lists; one
/// artifact set per point under `point_NNN/`.
pub fn run_sweep(
    config: &RunConfig,
    out_dir: &Path,
    kind: MapKind,
    scale: HeatmapScale,
) -> Result<Vec<RunSummary>> {
    if config.sweep.is_empty() {
        return Err(SpdcError::invalid(
            "sweep",
            "no sweep.* lists configured",
        ));
    }
    ensure_dir(out_dir)?;
    let mut out = Vec::new();
    for (i, (kappa, oam_index, length)) in config.sweep.points(config).iter().enumerate() {
        let mut point = config.clone();
        point.pump.cone_radius = *kappa;
        point.pump.oam_index = *oam_index;
        point.crystal.length = *length;
        point.sweep = Default::default();
        let dir: PathBuf = out_dir.join(format!("point_{i:03}"));
        let mut summary = run_as(&point, &dir, kind, scale)?;
        summary.scalars.insert("sweep_cone_radius".into(), *kappa);
        summary
            .scalars
            .insert("sweep_oam_index".into(), *oam_index as f64);
        summary.scalars.insert("sweep_length".into(), *length);
        summary.write(&dir.join("summary.json"))?;
        out.push(summary);
    }
    Ok(out)
}
