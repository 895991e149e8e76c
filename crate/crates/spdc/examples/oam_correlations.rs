//! OAM correlations of the photon pair: transition-amplitude matrix over
//! (l_s, l_i) for tilted Bessel-Gauss detection modes on the emission cone,
//! plus the marginal distributions.
//!
//! Optional argument: the pump OAM index (default 0).
//!
//! ```text
//! cargo run --release --example oam_correlations -- 1
//! ```

use spdc::config::RunConfig;
use spdc::crystal::PumpBeam;
use spdc::oam::{amplitude_matrix, marginals, tilted_frame, AmplitudeSettings, TiltedBesselMode};
use spdc::spectra::cone_geometry;

fn main() -> spdc::Result<()> {
    let ell_pump: i32 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let config = RunConfig::reference();
    // Paraxial family: pump and idler cones at 0.01 1/um, near-axis signal.
    let pump = PumpBeam {
        cone_radius: 0.01,
        annulus_width: 0.0005,
        oam_index: ell_pump,
        ..config.pump.clone()
    };
    let cone = cone_geometry(&config.crystal, &pump, config.envelope.gamma)?;
    let theta = cone.emission_tilt;
    let emitted_nm = 2.0 * pump.wavelength_nm;
    let signal = TiltedBesselMode {
        frame: tilted_frame(theta, -std::f64::consts::FRAC_PI_2),
        kappa_perp: 1e-4,
        ell: 0,
        width: 0.0005,
        wavelength_nm: emitted_nm,
    };
    let idler = TiltedBesselMode {
        frame: tilted_frame(theta, std::f64::consts::FRAC_PI_2),
        kappa_perp: 0.01,
        ell: 0,
        width: 0.0005,
        wavelength_nm: emitted_nm,
    };
    let settings = AmplitudeSettings {
        phi_points: 96,
        both_branches: true,
        rel_tol: 1e-2,
    };
    let matrix = amplitude_matrix(
        &pump,
        &signal,
        &idler,
        &config.crystal,
        &config.envelope,
        &settings,
        (-5, 5),
        (-5, 5),
    )?;

    println!("pump OAM {ell_pump}, detection tilt {theta:.4} rad");
    println!("|F| / max, rows l_s = -5..5, columns l_i = -5..5:");
    let peak = matrix.max_abs();
    for ls in (matrix.ell_s_min..=matrix.ell_s_max).rev() {
        let row: Vec<String> = (matrix.ell_i_min..=matrix.ell_i_max)
            .map(|li| format!("{:8.1e}", matrix.at(ls, li).norm() / peak))
            .collect();
        println!("  l_s={ls:+3}  {}", row.join(" "));
    }
    let (m_s, m_i) = marginals(&matrix)?;
    println!("signal marginal: {:?}", short(&m_s));
    println!("idler  marginal: {:?}", short(&m_i));
    println!(
        "quadrature doubling changed |F| by at most {:.1e}",
        matrix.doubling_rel_change
    );
    Ok(())
}

fn short(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.2e}")).collect()
}
