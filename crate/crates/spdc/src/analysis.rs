//! Map post-processing: ray profiles, ridge extraction, circle fits,
//! full-width measurements and peak statistics. Used by the CLI summaries
//! and the validation suite.

use crate::error::{Result, SpdcError};
use crate::grid::SpectrumGrid;

/// Radial profile of a map along a ray from `center` at azimuth `angle`.
pub fn ray_profile(
    grid: &SpectrumGrid,
    center: [f64; 2],
    angle: f64,
    r_min: f64,
    r_max: f64,
    samples: usize,
) -> (Vec<f64>, Vec<f64>) {
    let (sin_a, cos_a) = angle.sin_cos();
    let mut radii = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for i in 0..samples {
        let r = r_min + (r_max - r_min) * i as f64 / (samples - 1) as f64;
        radii.push(r);
        values.push(grid.sample(center[0] + r * cos_a, center[1] + r * sin_a));
    }
    (radii, values)
}

/// Full width at half maximum of a sampled profile, by linear interpolation
/// of the outermost half-crossings around the global maximum.
pub fn fwhm(radii: &[f64], values: &[f64]) -> Option<f64> {
    let (imax, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let mut lo = radii[0];
    for i in (1..=imax).rev() {
        if values[i - 1] < half && values[i] >= half {
            let t = (half - values[i - 1]) / (values[i] - values[i - 1]);
            lo = radii[i - 1] + t * (radii[i] - radii[i - 1]);
            break;
        }
    }
    let mut hi = *radii.last().unwrap();
    for i in imax..values.len() - 1 {
        if values[i] >= half && values[i + 1] < half {
            let t = (values[i] - half) / (values[i] - values[i + 1]);
            hi = radii[i] + t * (radii[i + 1] - radii[i]);
            break;
        }
    }
    Some(hi - lo)
}

/// Ridge statistics of a ring-like map around `center`.
#[derive(Debug, Clone)]
pub struct RingStats {
    /// Per-ray (azimuth, argmax radius, peak value, FWHM).
    pub rays: Vec<(f64, f64, f64, f64)>,
    /// Intensity-weighted mean |k - center| over the whole map.
    pub mass_mean_radius: f64,
    pub min_width: f64,
    pub max_width: f64,
    pub mean_ridge_radius: f64,
}

/// Scan `n_rays` azimuths and collect ridge radius and width per ray, plus
/// the mass-weighted mean radius of the full map about `center`.
pub fn ring_stats(
    grid: &SpectrumGrid,
    center: [f64; 2],
    r_min: f64,
    r_max: f64,
    n_rays: usize,
    samples: usize,
) -> Result<RingStats> {
    let mut rays = Vec::with_capacity(n_rays);
    let mut min_width = f64::INFINITY;
    let mut max_width = 0.0f64;
    for j in 0..n_rays {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / n_rays as f64;
        let (radii, values) = ray_profile(grid, center, angle, r_min, r_max, samples);
        let (imax, &peak) = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        if peak <= 0.0 {
            continue;
        }
        let width = fwhm(&radii, &values).unwrap_or(0.0);
        min_width = min_width.min(width);
        max_width = max_width.max(width);
        rays.push((angle, radii[imax], peak, width));
    }
    if rays.is_empty() {
        return Err(SpdcError::EmptyGrid);
    }
    let mut mass = 0.0;
    let mut moment = 0.0;
    for flat in 0..grid.values.len() {
        let (kx, ky) = grid.cell_center(flat);
        let r = (kx - center[0]).hypot(ky - center[1]);
        mass += grid.values[flat];
        moment += grid.values[flat] * r;
    }
    let mean_ridge = rays.iter().map(|r| r.1).sum::<f64>() / rays.len() as f64;
    Ok(RingStats {
        mass_mean_radius: moment / mass,
        rays,
        min_width,
        max_width,
        mean_ridge_radius: mean_ridge,
    })
}

/// Least-squares circle with its center constrained to the y-axis:
/// `x^2 + (y - c)^2 = R^2` fitted to points, linear in `(c, R^2 - c^2)`.
pub fn fit_circle_on_axis(points: &[[f64; 2]]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(SpdcError::invalid("circle fit", "need at least two points"));
    }
    // Normal equations for b = x^2 + y^2 = 2 c y + d.
    let n = points.len() as f64;
    let mut syy = 0.0;
    let mut sy = 0.0;
    let mut syb = 0.0;
    let mut sb = 0.0;
    for p in points {
        let b = p[0] * p[0] + p[1] * p[1];
        syy += 4.0 * p[1] * p[1];
        sy += 2.0 * p[1];
        syb += 2.0 * p[1] * b;
        sb += b;
    }
    let det = syy * n - sy * sy;
    if det.abs() < 1e-30 {
        return Err(SpdcError::invalid("circle fit", "degenerate point set"));
    }
    let c = (syb * n - sy * sb) / det;
    let d = (syy * sb - sy * syb) / det;
    let r2 = d + c * c;
    if r2 <= 0.0 {
        return Err(SpdcError::invalid("circle fit", "negative squared radius"));
    }
    Ok((c, r2.sqrt()))
}

/// Two displaced cones extracted from a double-ring map: per azimuth the
/// outermost and innermost local maxima above `prominence` times the ray
/// peak feed two on-axis circle fits.
#[derive(Debug, Clone, Copy)]
pub struct TwoConeFit {
    /// (center_y, radius) of the larger-radius circle.
    pub outer: (f64, f64),
    /// (center_y, radius) of the smaller-radius circle.
    pub inner: (f64, f64),
}

pub fn fit_two_cones(
    grid: &SpectrumGrid,
    r_min: f64,
    r_max: f64,
    n_rays: usize,
    samples: usize,
    prominence: f64,
) -> Result<TwoConeFit> {
    let mut outer_pts = Vec::new();
    let mut inner_pts = Vec::new();
    for j in 0..n_rays {
        let angle = 2.0 * std::f64::consts::PI * j as f64 / n_rays as f64;
        let (radii, values) = ray_profile(grid, [0.0, 0.0], angle, r_min, r_max, samples);
        let peak = values.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            continue;
        }
        let floor = prominence * peak;
        let mut locals = Vec::new();
        for i in 1..values.len() - 1 {
            if values[i] > floor && values[i] > values[i - 1] && values[i] >= values[i + 1] {
                locals.push(radii[i]);
            }
        }
        if locals.is_empty() {
            continue;
        }
        let (sin_a, cos_a) = angle.sin_cos();
        let r_out = *locals.last().unwrap();
        let r_in = locals[0];
        outer_pts.push([r_out * cos_a, r_out * sin_a]);
        inner_pts.push([r_in * cos_a, r_in * sin_a]);
    }
    let outer = fit_circle_on_axis(&outer_pts)?;
    let inner = fit_circle_on_axis(&inner_pts)?;
    if outer.1 >= inner.1 {
        Ok(TwoConeFit { outer, inner })
    } else {
        Ok(TwoConeFit {
            outer: inner,
            inner: outer,
        })
    }
}

impl TwoConeFit {
    /// Midpoint of the gap between the two circles on the side of the y-axis
    /// where they come closest.
    pub fn touch_point(&self) -> [f64; 2] {
        let (c_out, r_out) = self.outer;
        let (c_in, r_in) = self.inner;
        let bottom_gap = ((c_out - r_out) - (c_in - r_in)).abs();
        let top_gap = ((c_out + r_out) - (c_in + r_in)).abs();
        if bottom_gap <= top_gap {
            [0.0, 0.5 * ((c_out - r_out) + (c_in - r_in))]
        } else {
            [0.0, 0.5 * ((c_out + r_out) + (c_in + r_in))]
        }
    }
}

/// Argmax of a grid in mirror-canonical coordinates (|k_x|, k_y). Maps with
/// the optical axis in the Y-Z plane are exactly mirror symmetric, so the
/// maximum comes as a +-k_x pair; canonicalizing makes peak comparisons well
/// defined.
pub fn canonical_peak(grid: &SpectrumGrid) -> Result<(f64, f64, f64)> {
    let (kx, ky, v) = crate::spectra::find_max(grid)?;
    Ok((kx.abs(), ky, v))
}

/// Euclidean distance between two k-space points in units of the grid cell.
pub fn distance_in_cells(grid: &SpectrumGrid, a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0) / grid.dx()).hypot((a.1 - b.1) / grid.dy())
}
