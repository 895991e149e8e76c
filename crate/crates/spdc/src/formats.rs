//! On-disk formats: the KGRID1 binary grid, the KOAM1 complex matrix,
//! binary P5 graymaps for quick looks, marginal tables and JSON run
//! summaries.
//!
//! KGRID1 layout (bit-exact round trip by construction):
//! ```text
//! KGRID1\n
//! <nx> <ny>\n
//! <kx_min> <kx_max> <ky_min> <ky_max>\n
//! binary64-le row-major\n
//! <nx*ny little-endian f64, rows ordered k_y descending>
//! ```
//! KOAM1 replaces the bounds line with integer OAM ranges
//! `<ls_min> <ls_max> <li_min> <li_max>` and stores interleaved (re, im)
//! doubles.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Result, SpdcError};
use crate::grid::SpectrumGrid;
use crate::oam::{OamAmplitudeMatrix, OamGeometry};

fn bad(format: &'static str, msg: impl Into<String>) -> SpdcError {
    SpdcError::BadFormat {
        format,
        msg: msg.into(),
    }
}

/// Write a grid in the KGRID1 format.
pub fn write_grid(grid: &SpectrumGrid, path: &Path) -> Result<()> {
    grid.validate()?;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "KGRID1")?;
    writeln!(f, "{} {}", grid.nx, grid.ny)?;
    writeln!(
        f,
        "{} {} {} {}",
        grid.kx_min, grid.kx_max, grid.ky_min, grid.ky_max
    )?;
    writeln!(f, "binary64-le row-major")?;
    for v in &grid.values {
        f.write_all(&v.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

fn read_line(data: &[u8], pos: &mut usize, format: &'static str) -> Result<String> {
    let start = *pos;
    while *pos < data.len() && data[*pos] != b'\n' {
        *pos += 1;
    }
    if *pos >= data.len() {
        return Err(bad(format, "truncated header"));
    }
    let line = std::str::from_utf8(&data[start..*pos])
        .map_err(|_| bad(format, "header is not UTF-8"))?
        .to_string();
    *pos += 1;
    Ok(line)
}

/// Read a KGRID1 grid; `read_grid(write_grid(g)) == g` bit-exactly.
pub fn read_grid(path: &Path) -> Result<SpectrumGrid> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut pos = 0usize;
    const F: &str = "KGRID1";
    if read_line(&data, &mut pos, F)? != "KGRID1" {
        return Err(bad(F, "bad magic; expected KGRID1"));
    }
    let dims = read_line(&data, &mut pos, F)?;
    let mut it = dims.split_whitespace();
    let nx: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(F, "bad dimension line"))?;
    let ny: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(F, "bad dimension line"))?;
    let bounds = read_line(&data, &mut pos, F)?;
    let b: Vec<f64> = bounds
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(F, "bad bounds line"))?;
    if b.len() != 4 {
        return Err(bad(F, format!("expected 4 bounds, got {}", b.len())));
    }
    let layout = read_line(&data, &mut pos, F)?;
    if layout != "binary64-le row-major" {
        return Err(bad(F, format!("unsupported layout `{layout}`")));
    }
    let expected = nx * ny * 8;
    let payload = &data[pos..];
    if payload.len() != expected {
        return Err(bad(
            F,
            format!(
                "payload is {} bytes but the header promises {} ({}x{} doubles)",
                payload.len(),
                expected,
                nx,
                ny
            ),
        ));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let grid = SpectrumGrid {
        nx,
        ny,
        kx_min: b[0],
        kx_max: b[1],
        ky_min: b[2],
        ky_max: b[3],
        values,
    };
    grid.validate()?;
    Ok(grid)
}

/// Write an OAM amplitude matrix in the KOAM1 format.
pub fn write_oam_matrix(matrix: &OamAmplitudeMatrix, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "KOAM1")?;
    writeln!(
        f,
        "{} {} {} {}",
        matrix.ell_s_min, matrix.ell_s_max, matrix.ell_i_min, matrix.ell_i_max
    )?;
    writeln!(f, "binary64-le row-major interleaved")?;
    for c in &matrix.amplitudes {
        f.write_all(&c.re.to_le_bytes())?;
        f.write_all(&c.im.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Read a KOAM1 matrix (geometry metadata is not stored on disk).
pub fn read_oam_matrix(path: &Path) -> Result<OamAmplitudeMatrix> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut pos = 0usize;
    const F: &str = "KOAM1";
    if read_line(&data, &mut pos, F)? != "KOAM1" {
        return Err(bad(F, "bad magic; expected KOAM1"));
    }
    let ranges = read_line(&data, &mut pos, F)?;
    let r: Vec<i32> = ranges
        .split_whitespace()
        .map(|t| t.parse::<i32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad(F, "bad range line"))?;
    if r.len() != 4 || r[0] > r[1] || r[2] > r[3] {
        return Err(bad(F, "bad OAM ranges"));
    }
    let layout = read_line(&data, &mut pos, F)?;
    if layout != "binary64-le row-major interleaved" {
        return Err(bad(F, format!("unsupported layout `{layout}`")));
    }
    let rows = (r[1] - r[0] + 1) as usize;
    let cols = (r[3] - r[2] + 1) as usize;
    let expected = rows * cols * 16;
    let payload = &data[pos..];
    if payload.len() != expected {
        return Err(bad(
            F,
            format!(
                "payload is {} bytes but the header promises {}",
                payload.len(),
                expected
            ),
        ));
    }
    let amplitudes: Vec<Complex64> = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok(OamAmplitudeMatrix {
        ell_s_min: r[0],
        ell_s_max: r[1],
        ell_i_min: r[2],
        ell_i_max: r[3],
        amplitudes,
        geometry: OamGeometry {
            theta_signal: f64::NAN,
            phi_signal: f64::NAN,
            theta_idler: f64::NAN,
            phi_idler: f64::NAN,
            kappa_pump: f64::NAN,
            kappa_signal: f64::NAN,
            kappa_idler: f64::NAN,
        },
        doubling_rel_change: f64::NAN,
    })
}

/// Gray-value mapping for heatmaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapScale {
    Linear,
    /// Four decades of log10 below the maximum.
    Log,
}

/// Write an 8-bit binary graymap (P5); the maximum maps to 255 and row 0
/// carries the largest k_y (image up = +k_y). An all-zero grid produces a
/// black image and a warning string.
pub fn write_heatmap(
    grid: &SpectrumGrid,
    path: &Path,
    scale: HeatmapScale,
) -> Result<Option<String>> {
    grid.validate()?;
    let peak = grid.max_value();
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "P5")?;
    writeln!(f, "{} {}", grid.nx, grid.ny)?;
    writeln!(f, "255")?;
    let mut warning = None;
    if peak <= 0.0 {
        f.write_all(&vec![0u8; grid.nx * grid.ny])?;
        warning = Some("all-zero grid: emitted a uniform black image".to_string());
    } else {
        const DECADES: f64 = 4.0;
        let bytes: Vec<u8> = grid
            .values
            .iter()
            .map(|v| match scale {
                HeatmapScale::Linear => (255.0 * v / peak).round().clamp(0.0, 255.0) as u8,
                HeatmapScale::Log => {
                    if *v <= 0.0 {
                        0
                    } else {
                        let t = 1.0 + (v / peak).log10() / DECADES;
                        (255.0 * t).round().clamp(0.0, 255.0) as u8
                    }
                }
            })
            .collect();
        f.write_all(&bytes)?;
    }
    f.flush()?;
    Ok(warning)
}

/// Read back a P5 graymap (tests and quick tooling).
pub fn read_heatmap(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let mut pos = 0usize;
    const F: &str = "P5";
    if read_line(&data, &mut pos, F)? != "P5" {
        return Err(bad(F, "bad magic"));
    }
    let dims = read_line(&data, &mut pos, F)?;
    let mut it = dims.split_whitespace();
    let (w, h): (usize, usize) = (
        it.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(F, "bad dims"))?,
        it.next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(F, "bad dims"))?,
    );
    if read_line(&data, &mut pos, F)? != "255" {
        return Err(bad(F, "expected maxval 255"));
    }
    let payload = &data[pos..];
    if payload.len() != w * h {
        return Err(bad(F, "payload size mismatch"));
    }
    Ok((w, h, payload.to_vec()))
}

/// Write marginal OAM distributions as a two-column table
/// (`ell<TAB>weight`).
pub fn write_marginal(ell_min: i32, values: &[f64], path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# ell\tweight")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(f, "{}\t{}", ell_min + i as i32, v)?;
    }
    f.flush()?;
    Ok(())
}

/// Machine-readable record of one run: the resolved configuration, produced
/// artifacts, extracted scalars, convergence flags and warnings.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub command: String,
    /// Canonical config text; feeding it back reproduces the run.
    pub config: String,
    pub artifacts: Vec<String>,
    pub scalars: std::collections::BTreeMap<String, f64>,
    pub convergence: ConvergenceReport,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, serde::Serialize, serde::Deserialize)]
pub struct ConvergenceReport {
    pub converged_fraction: f64,
    pub unconverged_cells: usize,
    pub domain_flagged_cells: usize,
    pub max_doubling_change: f64,
}

impl RunSummary {
    pub fn new(command: &str, config: String) -> Self {
        RunSummary {
            command: command.to_string(),
            config,
            artifacts: Vec::new(),
            scalars: std::collections::BTreeMap::new(),
            convergence: ConvergenceReport {
                converged_fraction: 1.0,
                ..Default::default()
            },
            warnings: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| SpdcError::invalid("summary", e.to_string()))?;
        std::fs::write(path, json)?;
        Ok(())
    }
}
