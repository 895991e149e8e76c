//! Angular spectrum of the signal photon for a Bessel-Gauss pump, by full
//! quadrature and by the closed form, written as KGRID1 grids and graymaps.
//!
//! Uses a reduced grid so it finishes in seconds; pass a cone radius in
//! 1/um to explore the single-ring -> double-cone transition:
//!
//! ```text
//! cargo run --release --example angular_spectrum -- 0.09
//! ```

use spdc::config::RunConfig;
use spdc::formats::{write_grid, write_heatmap, HeatmapScale};
use spdc::grid::SpectrumGrid;
use spdc::spectra::{as_analytic, as_numeric, find_max};

fn main() -> spdc::Result<()> {
    let kappa: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.05);
    let mut config = RunConfig::reference();
    config.pump.cone_radius = kappa;
    config.quad.radial_points = 16;
    config.quad.azimuthal_points = 128;

    let template = SpectrumGrid::zeros_centered(128, 0.7);
    let map = as_numeric(
        &template,
        &config.crystal,
        &config.pump,
        &config.quad,
        &config.envelope,
    )?;
    let analytic = as_analytic(
        &template,
        &config.crystal,
        &config.pump,
        config.quad.azimuthal_points,
        config.envelope.gamma,
    )?;

    let out = std::path::Path::new("target/example-out/angular_spectrum");
    std::fs::create_dir_all(out)?;
    write_grid(&map.grid, &out.join("as_numeric.kgrid"))?;
    write_grid(&analytic, &out.join("as_analytic.kgrid"))?;
    write_heatmap(&map.grid, &out.join("as_numeric.pgm"), HeatmapScale::Linear)?;
    write_heatmap(&analytic, &out.join("as_analytic.pgm"), HeatmapScale::Linear)?;

    let (px, py, pv) = find_max(&map.grid)?;
    println!("pump cone radius {kappa} 1/um");
    println!("numeric AS maximum {pv:.4} at ({px:+.4}, {py:+.4}) 1/um");
    println!(
        "converged cells: {:.2}%",
        100.0 * map.converged_fraction()
    );
    println!("artifacts under {}", out.display());
    Ok(())
}
