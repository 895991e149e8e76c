//! Propagation-invariance residual of conditioned photon pairs: signal
//! wave vectors on the pump-momentum annulus around a fixed idler are close
//! to a tilted Bessel cone; the residual quantifies the deviation.
//!
//! ```text
//! cargo run --release --example propagation_invariance
//! ```

use spdc::config::RunConfig;
use spdc::crystal::derived_indices;
use spdc::spectra::pi_residual;

fn main() -> spdc::Result<()> {
    let config = RunConfig::reference();
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm)?;
    let kappa = config.pump.cone_radius;
    let idler = [0.0, -0.485];
    println!("idler fixed at ({}, {}) 1/um, pump cone {kappa} 1/um", idler[0], idler[1]);
    println!("signal on the annulus |ks + ki| = kappa:");
    for deg in (0..360).step_by(45) {
        let a = (deg as f64).to_radians();
        let ks = [-idler[0] + kappa * a.cos(), -idler[1] + kappa * a.sin()];
        let r = pi_residual(ks, idler, &idx, kappa);
        let ks2 = ks[0] * ks[0] + ks[1] * ks[1];
        println!(
            "  azimuth {deg:3} deg: residual {r:+.3e} 1/um^2  ({:+.3e} relative to |ks|^2)",
            r / ks2
        );
    }
    println!();
    println!("off the annulus the sign tracks inside/outside:");
    for scale in [0.7, 1.0, 1.3] {
        let ks = [-idler[0], -idler[1] + kappa * scale];
        let r = pi_residual(ks, idler, &idx, kappa);
        println!("  |ks + ki| = {:.3} kappa: residual {r:+.3e}", scale);
    }
    Ok(())
}
