//! Derived indices, walk-off and emission-cone geometry for the shipped
//! reference BBO dataset.
//!
//! ```text
//! cargo run --release --example indices_report
//! ```

use spdc::config::RunConfig;
use spdc::crystal::derived_indices;
use spdc::spectra::cone_geometry;

fn main() -> spdc::Result<()> {
    let config = RunConfig::reference();
    let idx = derived_indices(&config.crystal, config.pump.wavelength_nm)?;
    println!("pump wavelength        {} nm", config.pump.wavelength_nm);
    println!("n_o(pump)              {:.6}", idx.n_o_pump);
    println!("n_e(pump)              {:.6}", idx.n_e_pump);
    println!("n_o(degenerate)        {:.6}", idx.n_o_signal);
    println!("n_eff                  {:.6}", idx.n_eff);
    println!("beta                   {:+.6}", idx.beta);
    println!("eta                    {:.6}", idx.eta);
    println!("walk-off |beta a_y|    {:.4} rad", (idx.beta * idx.axis[1]).abs());

    let cone = cone_geometry(&config.crystal, &config.pump, config.envelope.gamma)?;
    println!();
    println!("emission cone:");
    println!("  r_AS                 {:.4} 1/um", cone.r_as);
    println!("  sigma_AS             {:.4} 1/um", cone.sigma_as);
    println!("  tilt theta_ec        {:.4} rad", cone.emission_tilt);
    println!(
        "  displaced cones      R+ = {:.4} at (0, {:+.4}); R- = {:.4} at (0, {:+.4})",
        cone.r_plus, cone.a_plus, cone.r_minus, cone.a_minus
    );
    for w in &cone.warnings {
        println!("  note: {w}");
    }
    Ok(())
}
