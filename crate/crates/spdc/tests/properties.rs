//! Property tests over the public API: format round trips, rotational
//! symmetries and dispersion-shell consistency under randomized inputs.

use proptest::prelude::*;
use spdc::crystal::{derived_indices, ordinary_kz, CrystalConfig, PumpBeam};
use spdc::grid::SpectrumGrid;
use spdc::phasematch::{pm_envelope, pump_spectrum, PhaseMatchSpec};

fn temp_path(tag: &str, case: u64) -> std::path::PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("spdc-prop-{tag}-{}-{case}", std::process::id()));
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kgrid_round_trip_bit_exact(
        nx in 2usize..12,
        ny in 2usize..12,
        kx0 in -2.0f64..-0.01,
        ky0 in -2.0f64..-0.01,
        seed in any::<u64>(),
        case in any::<u64>(),
    ) {
        let mut grid = SpectrumGrid::zeros(nx, ny, (kx0, -kx0), (ky0, -ky0));
        let mut state = seed | 1;
        for v in grid.values.iter_mut() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            *v = (state >> 11) as f64 / (1u64 << 53) as f64;
        }
        let path = temp_path("kgrid", case);
        spdc::formats::write_grid(&grid, &path).unwrap();
        let back = spdc::formats::read_grid(&path).unwrap();
        let _ = std::fs::remove_file(&path);
        // Bitwise: both payload and header bounds.
        prop_assert!(grid == back);
        prop_assert_eq!(grid.kx_min.to_bits(), back.kx_min.to_bits());
    }

    #[test]
    fn pump_modulus_rotation_invariant(
        radius in 0.001f64..0.4,
        angle in 0.0f64..(2.0 * std::f64::consts::PI),
        ell in -15i32..=15,
    ) {
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, ell);
        let a = pump_spectrum([radius, 0.0], &pump).norm();
        let b = pump_spectrum([radius * angle.cos(), radius * angle.sin()], &pump).norm();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn ordinary_dispersion_on_shell(kperp_frac in 0.0f64..0.999) {
        let idx = derived_indices(&CrystalConfig::bbo_reference(), 406.8).unwrap();
        let shell = idx.emitted_shell();
        let kperp = kperp_frac * shell;
        let kz = ordinary_kz(kperp, &idx).unwrap();
        let n = (kz * kz + kperp * kperp).sqrt() / (idx.k0 / 2.0);
        prop_assert!((n - idx.n_o_signal).abs() < 1e-12 * idx.n_o_signal);
    }

    #[test]
    fn envelopes_even_and_bounded(dkz in -0.5f64..0.5, length in 1.0f64..5000.0) {
        for spec in [PhaseMatchSpec::default(), PhaseMatchSpec::gaussian()] {
            let v = pm_envelope(dkz, length, &spec);
            let m = pm_envelope(-dkz, length, &spec);
            prop_assert_eq!(v, m);
            prop_assert!(v.abs() <= 1.0 + 1e-15);
        }
    }
}
