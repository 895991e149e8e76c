//! Numerical integration engine: fixed tensor-product rules with compensated
//! summation, Richardson doubling for convergence estimates, and a
//! deterministic data-parallel map over output cells.

use crate::error::{Result, SpdcError};

/// Fixed-order quadrature settings with a doubling-based convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub radial_points: usize,
    pub azimuthal_points: usize,
    pub rel_tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_points: 128,
            azimuthal_points: 256,
            rel_tol: 1e-2,
            max_doublings: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.radial_points < 8 || self.azimuthal_points < 8 {
            return Err(SpdcError::invalid("quad", "point counts must be >= 8"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(SpdcError::invalid("quad.rel_tol", "must be > 0"));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            radial_points: self.radial_points * 2,
            azimuthal_points: self.azimuthal_points * 2,
            ..*self
        }
    }
}

/// Value with a doubling-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    /// |value(2n) - value(n)| from the last doubling.
    pub error_estimate: f64,
    pub converged: bool,
    pub doublings_used: usize,
}

/// Neumaier compensated accumulator; fixed addition order makes cell values
/// independent of the surrounding parallel schedule.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn trapezoid_periodic(f: &dyn Fn(f64) -> f64, n: usize) -> Result<f64> {
    let step = 2.0 * std::f64::consts::PI / n as f64;
    let mut acc = Neumaier::default();
    for j in 0..n {
        let phi = j as f64 * step;
        let v = f(phi);
        if !v.is_finite() {
            return Err(SpdcError::NonFiniteSample {
                abscissa: format!("phi = {phi}"),
            });
        }
        acc.add(v);
    }
    Ok(acc.total() * step)
}

/// Trapezoid rule on the periodic domain [0, 2*pi); spectrally accurate for
/// smooth periodic integrands. The error estimate comes from one doubling.
pub fn integrate_periodic(f: impl Fn(f64) -> f64, n: usize) -> Result<QuadResult> {
    let coarse = trapezoid_periodic(&f, n)?;
    let fine = trapezoid_periodic(&f, 2 * n)?;
    let err = (fine - coarse).abs();
    Ok(QuadResult {
        value: fine,
        error_estimate: err,
        converged: true,
        doublings_used: 1,
    })
}

fn annulus_pass(
    f: &dyn Fn(f64, f64) -> f64,
    r_lo: f64,
    r_hi: f64,
    nr: usize,
    nphi: usize,
) -> Result<f64> {
    let (x, w) = gauss_legendre(nr);
    let half = 0.5 * (r_hi - r_lo);
    let mid = 0.5 * (r_hi + r_lo);
    let step = 2.0 * std::f64::consts::PI / nphi as f64;
    let mut acc = Neumaier::default();
    for i in 0..nr {
        let r = mid + half * x[i];
        let wr = half * w[i] * r; // polar measure r dr
        for j in 0..nphi {
            let phi = j as f64 * step;
            let v = f(r, phi);
            if !v.is_finite() {
                return Err(SpdcError::NonFiniteSample {
                    abscissa: format!("r = {r}, phi = {phi}"),
                });
            }
            acc.add(wr * v * step);
        }
    }
    Ok(acc.total())
}

/// Tensor-product integral of `f(r, phi)` over the annulus
/// `r in [r_lo, r_hi]`, `phi in [0, 2*pi)` with the polar measure `r dr dphi`:
/// radial Gauss-Legendre times periodic trapezoid, compensated summation, and
/// Richardson doubling until `rel_tol` or `max_doublings`.
pub fn integrate_annulus(
    f: impl Fn(f64, f64) -> f64,
    r_lo: f64,
    r_hi: f64,
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let mut nr = spec.radial_points;
    let mut nphi = spec.azimuthal_points;
    let mut value = annulus_pass(&f, r_lo, r_hi, nr, nphi)?;
    let mut err = f64::INFINITY;
    let mut doublings = 0;
    while doublings < spec.max_doublings.max(1) {
        nr *= 2;
        nphi *= 2;
        let refined = annulus_pass(&f, r_lo, r_hi, nr, nphi)?;
        err = (refined - value).abs();
        let scale = refined.abs().max(f64::MIN_POSITIVE);
        value = refined;
        doublings += 1;
        if err <= spec.rel_tol * scale {
            return Ok(QuadResult {
                value,
                error_estimate: err,
                converged: true,
                doublings_used: doublings,
            });
        }
    }
    Ok(QuadResult {
        value,
        error_estimate: err,
        converged: false,
        doublings_used: doublings,
    })
}

/// Deterministic parallel map over cell indices `0..n_cells`.
///
/// The output is identical for any worker count: cells are pure functions of
/// their index and results are collected in index order. Honors the
/// `SPDC_WORKERS` environment variable through the global rayon pool set up
/// in [`configure_workers`].
pub fn parallel_cell_map<T, F>(n_cells: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n_cells).into_par_iter().map(f).collect()
}

/// Install the global worker pool from `SPDC_WORKERS` if set. Safe to call
/// more than once; later calls are no-ops.
pub fn configure_workers() {
    if let Ok(v) = std::env::var("SPDC_WORKERS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
