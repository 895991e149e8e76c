//! 2-D scalar field over (k_x, k_y) with bounds metadata.

use crate::error::{Result, SpdcError};

/// Row-major grid of non-negative values over a k-space rectangle.
///
/// Cells are addressed by their centers; row 0 holds the largest `k_y`
/// (rows run top-down, matching the on-disk and image layouts).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid {
    pub nx: usize,
    pub ny: usize,
    pub kx_min: f64,
    pub kx_max: f64,
    pub ky_min: f64,
    pub ky_max: f64,
    pub values: Vec<f64>,
}

impl SpectrumGrid {
    pub fn zeros(nx: usize, ny: usize, kx: (f64, f64), ky: (f64, f64)) -> Self {
        SpectrumGrid {
            nx,
            ny,
            kx_min: kx.0,
            kx_max: kx.1,
            ky_min: ky.0,
            ky_max: ky.1,
            values: vec![0.0; nx * ny],
        }
    }

    /// Square grid centered on the origin with `|k| <= half_extent`.
    pub fn zeros_centered(n: usize, half_extent: f64) -> Self {
        Self::zeros(n, n, (-half_extent, half_extent), (-half_extent, half_extent))
    }

    /// Square grid centered at `(cx, cy)`.
    pub fn zeros_about(n: usize, center: [f64; 2], half_extent: f64) -> Self {
        Self::zeros(
            n,
            n,
            (center[0] - half_extent, center[0] + half_extent),
            (center[1] - half_extent, center[1] + half_extent),
        )
    }

    pub fn dx(&self) -> f64 {
        (self.kx_max - self.kx_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ky_max - self.ky_min) / self.ny as f64
    }

    /// Center abscissa of column `j`.
    pub fn kx_at(&self, j: usize) -> f64 {
        self.kx_min + (j as f64 + 0.5) * self.dx()
    }

    /// Center ordinate of row `i` (row 0 is the top, largest k_y).
    pub fn ky_at(&self, i: usize) -> f64 {
        self.ky_max - (i as f64 + 0.5) * self.dy()
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    /// Cell center for a flat index.
    pub fn cell_center(&self, flat: usize) -> (f64, f64) {
        let row = flat / self.nx;
        let col = flat % self.nx;
        (self.kx_at(col), self.ky_at(row))
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(SpdcError::invalid("grid", "nx and ny must be >= 2"));
        }
        if !(self.kx_min < self.kx_max && self.ky_min < self.ky_max)
            || !self.kx_min.is_finite()
            || !self.kx_max.is_finite()
            || !self.ky_min.is_finite()
            || !self.ky_max.is_finite()
        {
            return Err(SpdcError::invalid("grid", "bounds must be finite and ordered"));
        }
        if self.values.len() != self.nx * self.ny {
            return Err(SpdcError::invalid(
                "grid",
                format!(
                    "value count {} does not match nx*ny = {}",
                    self.values.len(),
                    self.nx * self.ny
                ),
            ));
        }
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(SpdcError::invalid("grid", "values must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Bilinear sample at `(kx, ky)` between cell centers; clamps at borders.
    pub fn sample(&self, kx: f64, ky: f64) -> f64 {
        let fx = (kx - self.kx_at(0)) / self.dx();
        let fy = (self.ky_at(0) - ky) / self.dy();
        let j = (fx.floor() as isize).clamp(0, self.nx as isize - 2) as usize;
        let i = (fy.floor() as isize).clamp(0, self.ny as isize - 2) as usize;
        let ax = (fx - j as f64).clamp(0.0, 1.0);
        let ay = (fy - i as f64).clamp(0.0, 1.0);
        let v00 = self.values[self.index(i, j)];
        let v01 = self.values[self.index(i, j + 1)];
        let v10 = self.values[self.index(i + 1, j)];
        let v11 = self.values[self.index(i + 1, j + 1)];
        v00 * (1.0 - ax) * (1.0 - ay) + v01 * ax * (1.0 - ay) + v10 * (1.0 - ax) * ay + v11 * ax * ay
    }
}
