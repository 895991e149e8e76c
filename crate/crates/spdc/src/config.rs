//! Run configuration: a line-oriented `section.key = value [unit]` grammar
//! with `#` comments, unit checking, unknown-key rejection and a canonical
//! serialization that round-trips.
//!
//! Internal units are um / 1/um / radians; wavelengths are carried in nm.
//! Dimensional keys require an explicit unit suffix.

use crate::crystal::{CrystalConfig, PumpBeam, Sellmeier};
use crate::error::{Result, SpdcError};
use crate::grid::SpectrumGrid;
use crate::phasematch::{Envelope, PhaseMatchSpec, GAMMA_DEFAULT};
use crate::quad::QuadratureSpec;

/// Output-grid settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub nx: usize,
    pub ny: usize,
    pub kx_min: f64,
    pub kx_max: f64,
    pub ky_min: f64,
    pub ky_max: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            nx: 256,
            ny: 256,
            kx_min: -0.7,
            kx_max: 0.7,
            ky_min: -0.7,
            ky_max: 0.7,
        }
    }
}

impl GridSettings {
    pub fn template(&self) -> SpectrumGrid {
        SpectrumGrid::zeros(
            self.nx,
            self.ny,
            (self.kx_min, self.kx_max),
            (self.ky_min, self.ky_max),
        )
    }
}

/// CAS-specific settings: the conditioning idler and an optional zoomed grid
/// centered at the mirrored idler.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CasSettings {
    pub idler: Option<[f64; 2]>,
    pub zoom_n: Option<usize>,
    pub zoom_half_extent: Option<f64>,
}

impl CasSettings {
    /// Grid for the CAS map: zoomed about `-idler` when configured,
    /// otherwise the main grid.
    pub fn template(&self, idler: [f64; 2], main: &GridSettings) -> SpectrumGrid {
        match (self.zoom_n, self.zoom_half_extent) {
            (Some(n), Some(h)) => SpectrumGrid::zeros_about(n, [-idler[0], -idler[1]], h),
            _ => main.template(),
        }
    }
}

/// OAM-run settings. The tilt defaults to the emission-cone angle; the
/// idler cone radius and mode width default to the pump's.
#[derive(Debug, Clone, PartialEq)]
pub struct OamSettings {
    pub theta: f64,
    pub phi_signal: f64,
    pub phi_idler: f64,
    pub kappa_signal: f64,
    pub kappa_idler: f64,
    pub mode_width: f64,
    pub ell_signal: (i32, i32),
    pub ell_idler: (i32, i32),
}

/// Parameter sweeps: cartesian product over the listed values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSettings {
    pub pump_cone_radius: Vec<f64>,
    pub pump_oam_index: Vec<i32>,
    pub crystal_length: Vec<f64>,
}

impl SweepSettings {
    pub fn is_empty(&self) -> bool {
        self.pump_cone_radius.is_empty()
            && self.pump_oam_index.is_empty()
            && self.crystal_length.is_empty()
    }

    /// All sweep points as (cone_radius, oam_index, length) overrides.
    pub fn points(&self, base: &RunConfig) -> Vec<(f64, i32, f64)> {
        let radii = if self.pump_cone_radius.is_empty() {
            vec![base.pump.cone_radius]
        } else {
            self.pump_cone_radius.clone()
        };
        let oams = if self.pump_oam_index.is_empty() {
            vec![base.pump.oam_index]
        } else {
            self.pump_oam_index.clone()
        };
        let lengths = if self.crystal_length.is_empty() {
            vec![base.crystal.length]
        } else {
            self.crystal_length.clone()
        };
        let mut out = Vec::new();
        for r in &radii {
            for l in &oams {
                for len in &lengths {
                    out.push((*r, *l, *len));
                }
            }
        }
        out
    }
}

/// Fully-resolved run configuration; all defaults are materialized at parse
/// time so the canonical serialization round-trips to an equal value.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub pump: PumpBeam,
    pub grid: GridSettings,
    pub quad: QuadratureSpec,
    pub envelope: PhaseMatchSpec,
    pub cas: CasSettings,
    pub oam: OamSettings,
    pub sweep: SweepSettings,
}

impl RunConfig {
    /// The shipped reference setup: Kato BBO cut at 29.3 deg, 406.8 nm pump,
    /// kappa = 0.05 1/um annulus of width 0.0007 1/um, 1 mm crystal.
    pub fn reference() -> Self {
        let crystal = CrystalConfig::bbo_reference();
        let pump = PumpBeam::new(406.8, 0.05, 0.0007, 0);
        let theta = default_tilt(&crystal, &pump);
        RunConfig {
            oam: OamSettings {
                theta,
                phi_signal: -std::f64::consts::FRAC_PI_2,
                phi_idler: std::f64::consts::FRAC_PI_2,
                kappa_signal: 1e-4,
                kappa_idler: pump.cone_radius,
                mode_width: pump.annulus_width,
                ell_signal: (-15, 15),
                ell_idler: (-15, 15),
            },
            crystal,
            pump,
            grid: GridSettings::default(),
            quad: QuadratureSpec::default(),
            envelope: PhaseMatchSpec::default(),
            cas: CasSettings::default(),
            sweep: SweepSettings::default(),
        }
    }

    /// Validate all sub-configs; returns soft warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        self.crystal.validate()?;
        let warnings = self.pump.validate()?;
        self.quad.validate()?;
        self.grid.template().validate()?;
        Ok(warnings)
    }
}

fn default_tilt(crystal: &CrystalConfig, pump: &PumpBeam) -> f64 {
    crate::spectra::cone_geometry(crystal, pump, GAMMA_DEFAULT)
        .map(|c| c.emission_tilt)
        .unwrap_or(0.0)
}

#[derive(Clone, Copy, PartialEq)]
enum Unit {
    Angle,
    LengthUm,
    WavelengthNm,
    WaveNumber,
    PmPerVolt,
    Pure,
}

struct KeySpec {
    key: &'static str,
    unit: Unit,
    /// Exact number of values, or None for a nonempty list.
    arity: Option<usize>,
}

const KEYS: &[KeySpec] = &[
    KeySpec { key: "crystal.sellmeier_o", unit: Unit::Pure, arity: Some(4) },
    KeySpec { key: "crystal.sellmeier_e", unit: Unit::Pure, arity: Some(4) },
    KeySpec { key: "crystal.axis_polar", unit: Unit::Angle, arity: Some(1) },
    KeySpec { key: "crystal.axis_azimuth", unit: Unit::Angle, arity: Some(1) },
    KeySpec { key: "crystal.length", unit: Unit::LengthUm, arity: Some(1) },
    KeySpec { key: "crystal.d22", unit: Unit::PmPerVolt, arity: Some(1) },
    KeySpec { key: "pump.wavelength", unit: Unit::WavelengthNm, arity: Some(1) },
    KeySpec { key: "pump.cone_radius", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "pump.annulus_width", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "pump.oam_index", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "pump.amplitude_scale", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "grid.nx", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "grid.ny", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "grid.kx_min", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "grid.kx_max", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "grid.ky_min", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "grid.ky_max", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "quad.radial_points", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "quad.azimuthal_points", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "quad.rel_tol", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "quad.max_doublings", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "envelope.kind", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "envelope.gamma", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "cas.idler_kx", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "cas.idler_ky", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "cas.zoom_n", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "cas.zoom_half_extent", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "oam.theta", unit: Unit::Angle, arity: Some(1) },
    KeySpec { key: "oam.phi_signal", unit: Unit::Angle, arity: Some(1) },
    KeySpec { key: "oam.phi_idler", unit: Unit::Angle, arity: Some(1) },
    KeySpec { key: "oam.kappa_signal", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "oam.kappa_idler", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "oam.mode_width", unit: Unit::WaveNumber, arity: Some(1) },
    KeySpec { key: "oam.ell_signal_min", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "oam.ell_signal_max", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "oam.ell_idler_min", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "oam.ell_idler_max", unit: Unit::Pure, arity: Some(1) },
    KeySpec { key: "sweep.pump_cone_radius", unit: Unit::WaveNumber, arity: None },
    KeySpec { key: "sweep.pump_oam_index", unit: Unit::Pure, arity: None },
    KeySpec { key: "sweep.crystal_length", unit: Unit::LengthUm, arity: None },
];

fn convert(unit: Unit, token: Option<&str>, line: usize) -> Result<f64> {
    let err = |msg: String| SpdcError::ConfigParse { line, msg };
    match unit {
        Unit::Pure => match token {
            None => Ok(1.0),
            Some(u) => Err(err(format!("dimensionless key takes no unit, got `{u}`"))),
        },
        Unit::Angle => match token {
            Some("rad") => Ok(1.0),
            Some("deg") => Ok(std::f64::consts::PI / 180.0),
            Some("mrad") => Ok(1e-3),
            Some(u) => Err(err(format!("expected angle unit (rad|deg|mrad), got `{u}`"))),
            None => Err(err("angle requires an explicit unit (rad|deg|mrad)".into())),
        },
        Unit::LengthUm => match token {
            Some("um") | Some("µm") => Ok(1.0),
            Some("mm") => Ok(1e3),
            Some("cm") => Ok(1e4),
            Some("nm") => Ok(1e-3),
            Some(u) => Err(err(format!("expected length unit (um|mm|cm|nm), got `{u}`"))),
            None => Err(err("length requires an explicit unit (um|mm|cm|nm)".into())),
        },
        Unit::WavelengthNm => match token {
            Some("nm") => Ok(1.0),
            Some("um") | Some("µm") => Ok(1e3),
            Some(u) => Err(err(format!("expected wavelength unit (nm|um), got `{u}`"))),
            None => Err(err("wavelength requires an explicit unit (nm|um)".into())),
        },
        Unit::WaveNumber => match token {
            Some("1/um") | Some("um^-1") | Some("1/µm") | Some("µm^-1") => Ok(1.0),
            Some("1/mm") | Some("mm^-1") => Ok(1e-3),
            Some(u) => Err(err(format!("expected wave-number unit (1/um|um^-1), got `{u}`"))),
            None => Err(err("wave number requires an explicit unit (1/um|um^-1)".into())),
        },
        Unit::PmPerVolt => match token {
            Some("pm/V") => Ok(1.0),
            Some(u) => Err(err(format!("expected pm/V, got `{u}`"))),
            None => Err(err("nonlinear coefficient requires the unit pm/V".into())),
        },
    }
}

/// Parse the key-value grammar into a fully-resolved [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    use std::collections::HashMap;
    let mut seen: HashMap<&str, (usize, Vec<f64>, Option<String>)> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key_raw, value_raw)) = content.split_once('=') else {
            return Err(SpdcError::ConfigParse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key_raw.trim();
        let spec = KEYS.iter().find(|s| s.key == key).ok_or_else(|| {
            SpdcError::ConfigParse {
                line,
                msg: format!("unknown key `{key}`"),
            }
        })?;
        if seen.contains_key(spec.key) {
            return Err(SpdcError::ConfigParse {
                line,
                msg: format!("duplicate key `{key}`"),
            });
        }
        let tokens: Vec<&str> = value_raw.split_whitespace().collect();
        if tokens.is_empty() {
            return Err(SpdcError::ConfigParse {
                line,
                msg: format!("missing value for `{key}`"),
            });
        }
        // Enum-valued key: keep the raw token.
        if spec.key == "envelope.kind" {
            seen.insert(spec.key, (line, Vec::new(), Some(tokens[0].to_string())));
            continue;
        }
        // Trailing non-numeric token is the unit.
        let (num_tokens, unit_token) = match tokens.last() {
            Some(last) if last.parse::<f64>().is_err() => {
                (&tokens[..tokens.len() - 1], Some(*last))
            }
            _ => (&tokens[..], None),
        };
        let scale = convert(spec.unit, unit_token, line)?;
        let mut values = Vec::with_capacity(num_tokens.len());
        for t in num_tokens {
            let v: f64 = t.parse().map_err(|_| SpdcError::ConfigParse {
                line,
                msg: format!("cannot parse `{t}` as a number for `{key}`"),
            })?;
            values.push(v * scale);
        }
        if let Some(arity) = spec.arity {
            if values.len() != arity {
                return Err(SpdcError::ConfigParse {
                    line,
                    msg: format!("`{key}` expects {arity} value(s), got {}", values.len()),
                });
            }
        } else if values.is_empty() {
            return Err(SpdcError::ConfigParse {
                line,
                msg: format!("`{key}` expects at least one value"),
            });
        }
        seen.insert(spec.key, (line, values, None));
    }

    let take = |key: &str| seen.get(key).map(|(_, v, _)| v.clone());
    let scalar = |key: &str| take(key).map(|v| v[0]);
    let int = |key: &str| -> Result<Option<i64>> {
        match scalar(key) {
            None => Ok(None),
            Some(v) => {
                if v.fract() != 0.0 {
                    let line = seen[key].0;
                    return Err(SpdcError::ConfigParse {
                        line,
                        msg: format!("`{key}` must be an integer, got {v}"),
                    });
                }
                Ok(Some(v as i64))
            }
        }
    };
    let required = |key: &'static str| -> Result<f64> {
        scalar(key).ok_or(SpdcError::ConfigParse {
            line: 0,
            msg: format!("missing required key `{key}`"),
        })
    };

    let sell = |key: &'static str| -> Result<Sellmeier> {
        let v = take(key).ok_or(SpdcError::ConfigParse {
            line: 0,
            msg: format!("missing required key `{key}`"),
        })?;
        Ok(Sellmeier::new(v[0], v[1], v[2], v[3]))
    };

    let crystal = CrystalConfig {
        sellmeier_o: sell("crystal.sellmeier_o")?,
        sellmeier_e: sell("crystal.sellmeier_e")?,
        axis_polar: required("crystal.axis_polar")?,
        axis_azimuth: scalar("crystal.axis_azimuth").unwrap_or(std::f64::consts::FRAC_PI_2),
        length: required("crystal.length")?,
        d22: scalar("crystal.d22").unwrap_or(2.2),
    };
    let pump = PumpBeam {
        wavelength_nm: required("pump.wavelength")?,
        cone_radius: required("pump.cone_radius")?,
        annulus_width: required("pump.annulus_width")?,
        oam_index: int("pump.oam_index")?.unwrap_or(0) as i32,
        amplitude_scale: scalar("pump.amplitude_scale").unwrap_or(1.0),
    };
    let grid = GridSettings {
        nx: int("grid.nx")?.unwrap_or(256) as usize,
        ny: int("grid.ny")?.unwrap_or(256) as usize,
        kx_min: scalar("grid.kx_min").unwrap_or(-0.7),
        kx_max: scalar("grid.kx_max").unwrap_or(0.7),
        ky_min: scalar("grid.ky_min").unwrap_or(-0.7),
        ky_max: scalar("grid.ky_max").unwrap_or(0.7),
    };
    let quad = QuadratureSpec {
        radial_points: int("quad.radial_points")?.unwrap_or(128) as usize,
        azimuthal_points: int("quad.azimuthal_points")?.unwrap_or(256) as usize,
        rel_tol: scalar("quad.rel_tol").unwrap_or(1e-2),
        max_doublings: int("quad.max_doublings")?.unwrap_or(2) as usize,
    };
    let envelope = PhaseMatchSpec {
        envelope: match seen.get("envelope.kind").and_then(|(_, _, s)| s.as_deref()) {
            None | Some("sinc") => Envelope::Sinc,
            Some("gaussian") => Envelope::Gaussian,
            Some(other) => {
                let line = seen["envelope.kind"].0;
                return Err(SpdcError::ConfigParse {
                    line,
                    msg: format!("envelope.kind must be sinc or gaussian, got `{other}`"),
                });
            }
        },
        gamma: scalar("envelope.gamma").unwrap_or(GAMMA_DEFAULT),
    };
    let cas = CasSettings {
        idler: match (scalar("cas.idler_kx"), scalar("cas.idler_ky")) {
            (Some(x), Some(y)) => Some([x, y]),
            (None, None) => None,
            _ => {
                return Err(SpdcError::ConfigParse {
                    line: 0,
                    msg: "cas.idler_kx and cas.idler_ky must be given together".into(),
                })
            }
        },
        zoom_n: int("cas.zoom_n")?.map(|v| v as usize),
        zoom_half_extent: scalar("cas.zoom_half_extent"),
    };
    let oam = OamSettings {
        theta: scalar("oam.theta").unwrap_or_else(|| default_tilt(&crystal, &pump)),
        phi_signal: scalar("oam.phi_signal").unwrap_or(-std::f64::consts::FRAC_PI_2),
        phi_idler: scalar("oam.phi_idler").unwrap_or(std::f64::consts::FRAC_PI_2),
        kappa_signal: scalar("oam.kappa_signal").unwrap_or(1e-4),
        kappa_idler: scalar("oam.kappa_idler").unwrap_or(pump.cone_radius),
        mode_width: scalar("oam.mode_width").unwrap_or(pump.annulus_width),
        ell_signal: (
            int("oam.ell_signal_min")?.unwrap_or(-15) as i32,
            int("oam.ell_signal_max")?.unwrap_or(15) as i32,
        ),
        ell_idler: (
            int("oam.ell_idler_min")?.unwrap_or(-15) as i32,
            int("oam.ell_idler_max")?.unwrap_or(15) as i32,
        ),
    };
    let sweep = SweepSettings {
        pump_cone_radius: take("sweep.pump_cone_radius").unwrap_or_default(),
        pump_oam_index: take("sweep.pump_oam_index")
            .unwrap_or_default()
            .iter()
            .map(|v| *v as i32)
            .collect(),
        crystal_length: take("sweep.crystal_length").unwrap_or_default(),
    };

    let config = RunConfig {
        crystal,
        pump,
        grid,
        quad,
        envelope,
        cas,
        oam,
        sweep,
    };
    config.validate()?;
    Ok(config)
}

/// Canonical text form; `parse_config(serialize_config(c)) == c`.
pub fn serialize_config(c: &RunConfig) -> String {
    let mut out = String::new();
    let s = &mut out;
    use std::fmt::Write;
    let _ = writeln!(
        s,
        "crystal.sellmeier_o = {} {} {} {}",
        c.crystal.sellmeier_o.a, c.crystal.sellmeier_o.b, c.crystal.sellmeier_o.c,
        c.crystal.sellmeier_o.d
    );
    let _ = writeln!(
        s,
        "crystal.sellmeier_e = {} {} {} {}",
        c.crystal.sellmeier_e.a, c.crystal.sellmeier_e.b, c.crystal.sellmeier_e.c,
        c.crystal.sellmeier_e.d
    );
    let _ = writeln!(s, "crystal.axis_polar = {} rad", c.crystal.axis_polar);
    let _ = writeln!(s, "crystal.axis_azimuth = {} rad", c.crystal.axis_azimuth);
    let _ = writeln!(s, "crystal.length = {} um", c.crystal.length);
    let _ = writeln!(s, "crystal.d22 = {} pm/V", c.crystal.d22);
    let _ = writeln!(s, "pump.wavelength = {} nm", c.pump.wavelength_nm);
    let _ = writeln!(s, "pump.cone_radius = {} 1/um", c.pump.cone_radius);
    let _ = writeln!(s, "pump.annulus_width = {} 1/um", c.pump.annulus_width);
    let _ = writeln!(s, "pump.oam_index = {}", c.pump.oam_index);
    let _ = writeln!(s, "pump.amplitude_scale = {}", c.pump.amplitude_scale);
    let _ = writeln!(s, "grid.nx = {}", c.grid.nx);
    let _ = writeln!(s, "grid.ny = {}", c.grid.ny);
    let _ = writeln!(s, "grid.kx_min = {} 1/um", c.grid.kx_min);
    let _ = writeln!(s, "grid.kx_max = {} 1/um", c.grid.kx_max);
    let _ = writeln!(s, "grid.ky_min = {} 1/um", c.grid.ky_min);
    let _ = writeln!(s, "grid.ky_max = {} 1/um", c.grid.ky_max);
    let _ = writeln!(s, "quad.radial_points = {}", c.quad.radial_points);
    let _ = writeln!(s, "quad.azimuthal_points = {}", c.quad.azimuthal_points);
    let _ = writeln!(s, "quad.rel_tol = {}", c.quad.rel_tol);
    let _ = writeln!(s, "quad.max_doublings = {}", c.quad.max_doublings);
    let _ = writeln!(
        s,
        "envelope.kind = {}",
        match c.envelope.envelope {
            Envelope::Sinc => "sinc",
            Envelope::Gaussian => "gaussian",
        }
    );
    let _ = writeln!(s, "envelope.gamma = {}", c.envelope.gamma);
    if let Some(idler) = c.cas.idler {
        let _ = writeln!(s, "cas.idler_kx = {} 1/um", idler[0]);
        let _ = writeln!(s, "cas.idler_ky = {} 1/um", idler[1]);
    }
    if let Some(n) = c.cas.zoom_n {
        let _ = writeln!(s, "cas.zoom_n = {n}");
    }
    if let Some(h) = c.cas.zoom_half_extent {
        let _ = writeln!(s, "cas.zoom_half_extent = {h} 1/um");
    }
    let _ = writeln!(s, "oam.theta = {} rad", c.oam.theta);
    let _ = writeln!(s, "oam.phi_signal = {} rad", c.oam.phi_signal);
    let _ = writeln!(s, "oam.phi_idler = {} rad", c.oam.phi_idler);
    let _ = writeln!(s, "oam.kappa_signal = {} 1/um", c.oam.kappa_signal);
    let _ = writeln!(s, "oam.kappa_idler = {} 1/um", c.oam.kappa_idler);
    let _ = writeln!(s, "oam.mode_width = {} 1/um", c.oam.mode_width);
    let _ = writeln!(s, "oam.ell_signal_min = {}", c.oam.ell_signal.0);
    let _ = writeln!(s, "oam.ell_signal_max = {}", c.oam.ell_signal.1);
    let _ = writeln!(s, "oam.ell_idler_min = {}", c.oam.ell_idler.0);
    let _ = writeln!(s, "oam.ell_idler_max = {}", c.oam.ell_idler.1);
    let join = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    if !c.sweep.pump_cone_radius.is_empty() {
        let _ = writeln!(s, "sweep.pump_cone_radius = {} 1/um", join(&c.sweep.pump_cone_radius));
    }
    if !c.sweep.pump_oam_index.is_empty() {
        let ints = c
            .sweep
            .pump_oam_index
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(s, "sweep.pump_oam_index = {ints}");
    }
    if !c.sweep.crystal_length.is_empty() {
        let _ = writeln!(s, "sweep.crystal_length = {} um", join(&c.sweep.crystal_length));
    }
    out
}
