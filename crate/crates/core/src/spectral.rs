//! Frequency grids, reflections and the discrete Fourier transforms used by
//! the solver.
//!
//! Conventions: the forward transform has kernel `exp(-i <ξ, x>)`, the inverse
//! `exp(+i <ξ, x>) / (2π)^d`. Every frequency axis sits on a half-integer offset
//! grid `ξ_m = (m - n/2 + 1/2) Δξ`, so no sample lands on `ξ = 0`. On a finite
//! window this is the antiperiodic DFT; forward and inverse are exact inverses.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array, Array4, ArrayViewMut1, Axis, Dimension, RemoveAxis, Slice};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{EdgeError, Result};
use crate::geometry::{EdgeGrid, PhysicalField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// One-dimensional offset-grid DFT between `x_k = x0 + k h` and
/// `ξ_m = ξ0 + m Δξ`.
#[derive(Clone)]
pub struct OffsetDft {
    n: usize,
    h: f64,
    x0: f64,
    dxi: f64,
    xi0: f64,
    pre: Vec<Complex64>,
    post: Vec<Complex64>,
    inv_pre: Vec<Complex64>,
    inv_post: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl OffsetDft {
    pub fn new(n: usize, x0: f64, h: f64) -> Self {
        let dxi = 2.0 * PI / (n as f64 * h);
        let xi0 = -(n as f64 / 2.0 - 0.5) * dxi;
        let phase0 = Complex64::from_polar(1.0, -xi0 * x0);
        let pre = (0..n)
            .map(|k| Complex64::from_polar(1.0, -xi0 * k as f64 * h))
            .collect();
        let post = (0..n)
            .map(|m| phase0 * Complex64::from_polar(h, -(m as f64) * dxi * x0))
            .collect();
        let inv_pre = (0..n)
            .map(|m| Complex64::from_polar(1.0, m as f64 * dxi * x0))
            .collect();
        let scale = dxi / (2.0 * PI);
        let inv_post = (0..n)
            .map(|k| phase0.conj() * Complex64::from_polar(scale, xi0 * k as f64 * h))
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n,
            h,
            x0,
            dxi,
            xi0,
            pre,
            post,
            inv_pre,
            inv_post,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> f64 {
        self.x0
    }

    pub fn frequency_spacing(&self) -> f64 {
        self.dxi
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.xi0 + m as f64 * self.dxi).collect()
    }

    pub fn process(&self, buf: &mut [Complex64], dir: Direction) {
        debug_assert_eq!(buf.len(), self.n);
        match dir {
            Direction::Forward => {
                buf.iter_mut().zip(&self.pre).for_each(|(v, w)| *v *= w);
                self.fwd.process(buf);
                buf.iter_mut().zip(&self.post).for_each(|(v, w)| *v *= w);
            }
            Direction::Inverse => {
                buf.iter_mut().zip(&self.inv_pre).for_each(|(v, w)| *v *= w);
                self.inv.process(buf);
                buf.iter_mut().zip(&self.inv_post).for_each(|(v, w)| *v *= w);
            }
        }
    }

    fn process_lane(&self, mut lane: ArrayViewMut1<Complex64>, buf: &mut Vec<Complex64>, dir: Direction) {
        buf.clear();
        buf.extend(lane.iter().copied());
        self.process(buf, dir);
        lane.iter_mut().zip(buf.iter()).for_each(|(d, s)| *d = *s);
    }
}

/// Applies `dft` along `axis`, lane by lane in memory order.
pub fn transform_axis<D: Dimension>(
    data: &mut Array<Complex64, D>,
    axis: usize,
    dft: &OffsetDft,
    dir: Direction,
) {
    assert_eq!(data.len_of(Axis(axis)), dft.len(), "axis length mismatch");
    let mut buf = Vec::with_capacity(dft.len());
    for lane in data.lanes_mut(Axis(axis)) {
        dft.process_lane(lane, &mut buf, dir);
    }
}

/// How a half-line sample vector is continued to the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    /// `g(-Y) = -g(Y)`; the `Y = 0` sample becomes 0.
    Odd,
    /// `g(-Y) = g(Y)`.
    Even,
    /// Zero for `Y < 0`, half weight at `Y = 0` (trapezoid end point), so the
    /// discrete transform approximates `∫_0^∞ g e^{-iηY} dY`.
    HalfLine,
}

/// Extends samples on `Y_k = k h`, `k < n`, to the reflected axis
/// `Y_k = (k - n) h`, `k < 2n`. The sample at `Y = -n h` has no partner and is 0.
pub fn reflect(g: &[Complex64], ext: Extension) -> Vec<Complex64> {
    let n = g.len();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n];
    for k in 1..n {
        out[n + k] = g[k];
        out[n - k] = match ext {
            Extension::Odd => -g[k],
            Extension::Even => g[k],
            Extension::HalfLine => Complex64::new(0.0, 0.0),
        };
    }
    out[n] = match ext {
        Extension::Odd => Complex64::new(0.0, 0.0),
        Extension::Even => g[0],
        Extension::HalfLine => 0.5 * g[0],
    };
    out
}

/// Odd reflection of half-line samples.
pub fn odd_reflect(g: &[Complex64]) -> Vec<Complex64> {
    reflect(g, Extension::Odd)
}

/// Restriction of reflected samples back to `Y >= 0`.
pub fn restrict(full: &[Complex64]) -> Vec<Complex64> {
    full[full.len() / 2..].to_vec()
}

/// Odd reflection of every lane along `axis` (length doubles).
pub fn odd_reflect_axis<D: Dimension + RemoveAxis>(
    a: &Array<Complex64, D>,
    axis: usize,
) -> Array<Complex64, D> {
    let n = a.len_of(Axis(axis));
    let mut dim = a.raw_dim();
    dim[axis] = 2 * n;
    let mut out = Array::zeros(dim);
    for k in 1..n {
        let src = a.index_axis(Axis(axis), k);
        out.index_axis_mut(Axis(axis), n + k).assign(&src);
        out.index_axis_mut(Axis(axis), n - k).assign(&src.mapv(|z| -z));
    }
    out
}

/// Keeps the `Y >= 0` half of a reflected axis.
pub fn restrict_axis<D: Dimension>(a: &Array<Complex64, D>, axis: usize) -> Array<Complex64, D> {
    let n = a.len_of(Axis(axis)) / 2;
    a.slice_axis(Axis(axis), Slice::from(n..)).to_owned()
}

/// Frequency samples dual to an [`EdgeGrid`] with both Y axes reflected.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub d_lambda: f64,
    pub d_eta: f64,
    pub spatial: EdgeGrid,
}

impl FrequencyGrid {
    pub fn new(grid: EdgeGrid) -> Self {
        let xd = x_dft(&grid);
        let yd = y_dft(&grid);
        Self {
            lambda: xd.frequencies(),
            eta: yd.frequencies(),
            d_lambda: xd.frequency_spacing(),
            d_eta: yd.frequency_spacing(),
            spatial: grid,
        }
    }

    pub fn shape(&self) -> (usize, usize, usize, usize) {
        (self.lambda.len(), self.lambda.len(), self.eta.len(), self.eta.len())
    }

    /// Index of `-ξ` on a symmetric offset axis.
    pub fn mirror(n: usize, m: usize) -> usize {
        n - 1 - m
    }

    pub fn cell_volume(&self) -> f64 {
        self.d_lambda * self.d_lambda * self.d_eta * self.d_eta
    }
}

pub fn x_dft(grid: &EdgeGrid) -> OffsetDft {
    OffsetDft::new(grid.nx, -grid.lx, grid.hx())
}

/// DFT on the reflected Y axis `[-ly, ly)`.
pub fn y_dft(grid: &EdgeGrid) -> OffsetDft {
    OffsetDft::new(2 * grid.ny, -grid.ly, grid.hy())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectralKind {
    /// Transform in all four variables.
    Full,
    /// Transform in all variables except `Y1`.
    MissingY1,
    /// Transform in all variables except `Y2`.
    MissingY2,
}

/// Samples on a [`FrequencyGrid`]. For the partial kinds the untransformed
/// axis keeps its physical length `ny` and holds `Y >= 0` samples.
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub grid: FrequencyGrid,
    pub kind: SpectralKind,
    pub data: Array4<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: FrequencyGrid) -> Self {
        let data = Array4::zeros(grid.shape());
        Self {
            grid,
            kind: SpectralKind::Full,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

/// Reflects a quadrant field to the full Y window, one extension per Y axis.
pub fn extend_field(field: &PhysicalField, y1: Extension, y2: Extension) -> Array4<Complex64> {
    let (nx, _, ny, _) = field.data.dim();
    let mut out = Array4::zeros((nx, nx, 2 * ny, 2 * ny));
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    // Y2 first, into the Y1 >= 0 half of `out`.
    for a in 0..nx {
        for b in 0..nx {
            for c in 0..ny {
                for d in 0..ny {
                    col[d] = field.data[[a, b, c, d]];
                }
                let r = reflect(&col, y2);
                for (d, v) in r.into_iter().enumerate() {
                    out[[a, b, ny + c, d]] = v;
                }
            }
            for d in 0..2 * ny {
                for c in 0..ny {
                    col[c] = out[[a, b, ny + c, d]];
                }
                let r = reflect(&col, y1);
                for (c, v) in r.into_iter().enumerate() {
                    out[[a, b, c, d]] = v;
                }
            }
        }
    }
    out
}

fn check_shape(data: &Array4<Complex64>, grid: &FrequencyGrid) -> Result<()> {
    if data.dim() != grid.shape() {
        return Err(EdgeError::GridMismatch(format!(
            "array {:?} vs frequency grid {:?}",
            data.dim(),
            grid.shape()
        )));
    }
    Ok(())
}

/// Forward transform of a field given on the full reflected window.
pub fn forward_transform(g: &Array4<Complex64>, grid: &FrequencyGrid) -> Result<SpectralField> {
    check_shape(g, grid)?;
    let mut data = g.clone();
    let xd = x_dft(&grid.spatial);
    let yd = y_dft(&grid.spatial);
    transform_axis(&mut data, 0, &xd, Direction::Forward);
    transform_axis(&mut data, 1, &xd, Direction::Forward);
    transform_axis(&mut data, 2, &yd, Direction::Forward);
    transform_axis(&mut data, 3, &yd, Direction::Forward);
    Ok(SpectralField {
        grid: grid.clone(),
        kind: SpectralKind::Full,
        data,
    })
}

/// Inverse of [`forward_transform`], returning samples on the reflected window.
pub fn inverse_transform(f: &SpectralField) -> Result<Array4<Complex64>> {
    check_shape(&f.data, &f.grid)?;
    if f.kind != SpectralKind::Full {
        return Err(EdgeError::InvalidArgument(
            "inverse_transform expects a full transform".into(),
        ));
    }
    let mut data = f.data.clone();
    let xd = x_dft(&f.grid.spatial);
    let yd = y_dft(&f.grid.spatial);
    transform_axis(&mut data, 3, &yd, Direction::Inverse);
    transform_axis(&mut data, 2, &yd, Direction::Inverse);
    transform_axis(&mut data, 1, &xd, Direction::Inverse);
    transform_axis(&mut data, 0, &xd, Direction::Inverse);
    Ok(data)
}

/// `ζ1 = sqrt(λ1² + λ2² + η1²)`.
pub fn zeta1(lam1: f64, lam2: f64, eta1: f64) -> f64 {
    (lam1 * lam1 + lam2 * lam2 + eta1 * eta1).sqrt()
}

/// `ζ2 = sqrt((1 + α²)(λ1² + λ2²) + η2²)`.
pub fn zeta2(lam1: f64, lam2: f64, eta2: f64, alpha: f64) -> f64 {
    ((1.0 + alpha * alpha) * (lam1 * lam1 + lam2 * lam2) + eta2 * eta2).sqrt()
}

/// Symbol of the straightened Laplacian (up to sign):
/// `λ1² + λ2² + (1 + α²) η1² - 2α η1 η2 + η2²`.
pub fn laplace_symbol(
    lam1: Complex64,
    lam2: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    alpha: f64,
) -> Complex64 {
    lam1 * lam1 + lam2 * lam2 + (1.0 + alpha * alpha) * eta1 * eta1 - 2.0 * alpha * eta1 * eta2
        + eta2 * eta2
}

/// Reflected symbol in completed-square form,
/// `λ1² + λ2² + (η2 - α|η1|)² + η1²`.
pub fn reflected_symbol(lam1: f64, lam2: f64, eta1: f64, eta2: f64, alpha: f64) -> f64 {
    let s = eta2 - alpha * eta1.abs();
    lam1 * lam1 + lam2 * lam2 + s * s + eta1 * eta1
}

/// Root in `η2`: `α|η1| - i ζ1`.
pub fn eta2_root(lam1: f64, lam2: f64, eta1: f64, alpha: f64) -> Complex64 {
    Complex64::new(alpha * eta1.abs(), -zeta1(lam1, lam2, eta1))
}

/// Root in `η1`: `(α|η2| - i ζ2) / (1 + α²)`.
pub fn eta1_root(lam1: f64, lam2: f64, eta2: f64, alpha: f64) -> Complex64 {
    Complex64::new(alpha * eta2.abs(), -zeta2(lam1, lam2, eta2, alpha)) / (1.0 + alpha * alpha)
}
