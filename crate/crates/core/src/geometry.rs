//! The edge domain `{Im z1 > alpha Im z2 > 0}`, its straightening chart and
//! the `u_alpha = u1 - alpha u2` component algebra.
//!
//! Fields live on a uniform tensor grid over the straightened domain: `x1, x2`
//! in `[-lx, lx)` and `Y1, Y2` in `[0, ly)`, both Y faces included as index 0.

use ndarray::{Array4, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cutoff;
use crate::error::{EdgeError, Result};

/// Outer-shell magnitude below which sampled data counts as rapidly decaying.
pub const DECAY_TOL: f64 = 1e-12;

/// One experiment: the wedge parameter, the grid and the tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeConfig {
    pub alpha: f64,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    /// Relative singular-value cutoff used by the least-squares fits.
    pub fit_tol: f64,
    pub taylor_order: usize,
}

impl Default for EdgeConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            lx: 6.0,
            ly: 6.0,
            nx: 32,
            ny: 32,
            fp_tol: 1e-6,
            fp_max_iter: 20,
            fit_tol: 1e-14,
            taylor_order: 4,
        }
    }
}

impl EdgeConfig {
    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_grid(mut self, nx: usize, ny: usize) -> Self {
        self.nx = nx;
        self.ny = ny;
        self
    }

    pub fn with_extents(mut self, lx: f64, ly: f64) -> Self {
        self.lx = lx;
        self.ly = ly;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(EdgeError::Config(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        for (name, v) in [("grid.Lx", self.lx), ("grid.LY", self.ly)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EdgeError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, n) in [("grid.Nx", self.nx), ("grid.NY", self.ny)] {
            if n < 2 || !n.is_power_of_two() {
                return Err(EdgeError::Config(format!(
                    "{name} must be a power of two >= 2, got {n}"
                )));
            }
        }
        for (name, v) in [("fp.tol", self.fp_tol), ("fit tol", self.fit_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EdgeError::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> EdgeGrid {
        EdgeGrid {
            nx: self.nx,
            ny: self.ny,
            lx: self.lx,
            ly: self.ly,
        }
    }
}

/// Uniform grid on the straightened domain (Y >= 0 quadrant only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl EdgeGrid {
    pub fn hx(&self) -> f64 {
        2.0 * self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        -self.lx + k as f64 * self.hx()
    }

    pub fn y(&self, k: usize) -> f64 {
        k as f64 * self.hy()
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.nx, self.nx, self.ny, self.ny)
    }

    /// Index of the `x = 0` sample (always present since `nx` is even).
    pub fn x_origin(&self) -> usize {
        self.nx / 2
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hx() * self.hy() * self.hy()
    }

    pub fn same_as(&self, other: &EdgeGrid) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.lx - other.lx).abs() <= 1e-12 * self.lx
            && (self.ly - other.ly).abs() <= 1e-12 * self.ly
    }
}

/// Complex samples of a scalar function on an [`EdgeGrid`], indexed
/// `[x1, x2, Y1, Y2]`.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    pub grid: EdgeGrid,
    pub data: Array4<Complex64>,
}

impl PhysicalField {
    pub fn zeros(grid: EdgeGrid) -> Self {
        Self {
            grid,
            data: Array4::zeros(grid.shape()),
        }
    }

    pub fn from_fn(grid: EdgeGrid, f: impl Fn(f64, f64, f64, f64) -> Complex64) -> Self {
        let data = Array4::from_shape_fn(grid.shape(), |(a, b, c, d)| {
            f(grid.x(a), grid.x(b), grid.y(c), grid.y(d))
        });
        Self { grid, data }
    }

    pub fn ensure_same_grid(&self, other: &PhysicalField) -> Result<()> {
        if self.grid.same_as(&other.grid) && self.data.dim() == other.data.dim() {
            Ok(())
        } else {
            Err(EdgeError::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest magnitude on the outermost shell (x faces and far Y faces).
    pub fn outer_shell_max(&self) -> f64 {
        let (nx, _, ny, _) = self.data.dim();
        let mut m: f64 = 0.0;
        for ((a, b, c, d), z) in self.data.indexed_iter() {
            let shell = a == 0 || a == nx - 1 || b == 0 || b == nx - 1 || c == ny - 1 || d == ny - 1;
            if shell {
                m = m.max(z.norm());
            }
        }
        m
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// `(x1, x2, y1, y2)` with `y = Im z`.
    Original,
    /// `(x1, x2, Y1, Y2)` with `Y1 = y1 - alpha y2`, `Y2 = y2`.
    Edge,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalPoint {
    pub x1: f64,
    pub x2: f64,
    pub v1: f64,
    pub v2: f64,
    pub chart: Chart,
}

impl PhysicalPoint {
    pub fn original(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self {
            x1,
            x2,
            v1: y1,
            v2: y2,
            chart: Chart::Original,
        }
    }

    pub fn edge(x1: f64, x2: f64, y1: f64, y2: f64) -> Self {
        Self {
            x1,
            x2,
            v1: y1,
            v2: y2,
            chart: Chart::Edge,
        }
    }

    /// Closed-domain membership in the point's own chart.
    pub fn in_closure(&self, alpha: f64) -> bool {
        match self.chart {
            Chart::Edge => self.v1 >= 0.0 && self.v2 >= 0.0,
            Chart::Original => self.v1 - alpha * self.v2 >= 0.0 && self.v2 >= 0.0,
        }
    }
}

/// `Y2 = y2`, `Y1 = y1 - alpha y2`. Points already in the edge chart pass through.
pub fn to_edge_coords(p: PhysicalPoint, alpha: f64) -> PhysicalPoint {
    match p.chart {
        Chart::Edge => p,
        Chart::Original => PhysicalPoint::edge(p.x1, p.x2, p.v1 - alpha * p.v2, p.v2),
    }
}

/// `y1 = Y1 + alpha Y2`, `y2 = Y2`.
pub fn from_edge_coords(p: PhysicalPoint, alpha: f64) -> PhysicalPoint {
    match p.chart {
        Chart::Original => p,
        Chart::Edge => PhysicalPoint::original(p.x1, p.x2, p.v1 + alpha * p.v2, p.v2),
    }
}

/// `Im z1 > alpha Im z2` and `Im z2 > 0` (the chained inequality read so that
/// `alpha = 0` gives the product of half-planes).
pub fn in_domain(z1_im: f64, z2_im: f64, alpha: f64) -> bool {
    z1_im > alpha * z2_im && z2_im > 0.0
}

/// `u_alpha = u1 - alpha u2`.
pub fn combine_components(
    u1: &PhysicalField,
    u2: &PhysicalField,
    alpha: f64,
) -> Result<PhysicalField> {
    u1.ensure_same_grid(u2)?;
    let mut out = u1.clone();
    Zip::from(&mut out.data)
        .and(&u2.data)
        .for_each(|a, &b| *a -= b * alpha);
    Ok(out)
}

/// Inverse of [`combine_components`]: `u1 = u_alpha + alpha u2`.
pub fn recover_u1(
    u_alpha: &PhysicalField,
    u2: &PhysicalField,
    alpha: f64,
) -> Result<PhysicalField> {
    u_alpha.ensure_same_grid(u2)?;
    let mut out = u_alpha.clone();
    Zip::from(&mut out.data)
        .and(&u2.data)
        .for_each(|a, &b| *a += b * alpha);
    Ok(out)
}

/// Right-hand side `f = f1 dz̄1 + f2 dz̄2` sampled in edge coordinates.
#[derive(Clone, Debug)]
pub struct FormData {
    pub f1: PhysicalField,
    pub f2: PhysicalField,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Gaussian,
    EdgeOne,
}

impl FormData {
    pub fn new(f1: PhysicalField, f2: PhysicalField) -> Result<Self> {
        f1.ensure_same_grid(&f2)?;
        Ok(Self { f1, f2 })
    }

    pub fn zeros(grid: EdgeGrid) -> Self {
        Self {
            f1: PhysicalField::zeros(grid),
            f2: PhysicalField::zeros(grid),
        }
    }

    pub fn grid(&self) -> EdgeGrid {
        self.f1.grid
    }

    /// `f1 = f2 = exp(-(x1² + x2² + Y1² + Y2²))`.
    pub fn gaussian(grid: EdgeGrid) -> Self {
        let g = PhysicalField::from_fn(grid, |a, b, c, d| {
            Complex64::new((-(a * a + b * b + c * c + d * d)).exp(), 0.0)
        });
        Self {
            f1: g.clone(),
            f2: g,
        }
    }

    /// `f1 = f2 = 1` near the edge, cut off smoothly by a radial plateau that
    /// vanishes outside radius `ly / 2`.
    pub fn edge_one(grid: EdgeGrid) -> Self {
        let outer = 0.5 * grid.ly;
        let g = PhysicalField::from_fn(grid, |a, b, c, d| {
            let r = (a * a + b * b + c * c + d * d).sqrt();
            Complex64::new(cutoff::plateau(r, 0.5 * outer, outer), 0.0)
        });
        Self {
            f1: g.clone(),
            f2: g,
        }
    }

    pub fn preset(preset: Preset, grid: EdgeGrid) -> Self {
        match preset {
            Preset::Gaussian => Self::gaussian(grid),
            Preset::EdgeOne => Self::edge_one(grid),
        }
    }

    pub fn f_alpha(&self, alpha: f64) -> PhysicalField {
        combine_components(&self.f1, &self.f2, alpha).expect("components share a grid")
    }

    /// Checks the rapid-decay assumption on the outer shell.
    pub fn validate(&self) -> Result<()> {
        let m = self.f1.outer_shell_max().max(self.f2.outer_shell_max());
        if m > DECAY_TOL {
            return Err(EdgeError::NoDecay {
                magnitude: m,
                tolerance: DECAY_TOL,
            });
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.f1.data.iter().chain(self.f2.data.iter()).all(|z| *z == Complex64::new(0.0, 0.0))
    }
}
