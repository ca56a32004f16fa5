//! Boundary data `b2` on `{Y2 = 0}` and `b_alpha` on `{Y1 = 0}` that couple
//! the two components, and the fixed-point loop that makes them consistent
//! with the solution they produce.

use std::fmt::Write as _;

use ndarray::{s, Array2, Array3, Axis, Zip};
use num_complex::Complex64;
use serde::Serialize;

use crate::cutoff;
use crate::error::{EdgeError, Result};
use crate::geometry::{EdgeConfig, EdgeGrid, FormData, PhysicalField};
use crate::solver::{self, ComponentSolution};

/// One-sided fourth-order first derivative, `(-25, 48, -36, 16, -3) / 12h`.
pub const ONE_SIDED_D1: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];

/// Width of the bump used to remove the edge value, as a fraction of `L_Y`.
pub const EDGE_BUMP_FRACTION: f64 = 0.25;

/// Extra stencil points beyond the derivative order for Taylor data.
const TAYLOR_STENCIL_EXTRA: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Face {
    /// `Y1 = 0`; traces are functions of `(x1, x2, Y2)`.
    Y1,
    /// `Y2 = 0`; traces are functions of `(x1, x2, Y1)`.
    Y2,
}

#[derive(Clone, Debug)]
pub struct BoundaryTrace {
    pub grid: EdgeGrid,
    /// `b2(x1, x2, Y1)`.
    pub b2: Array3<Complex64>,
    /// `b_alpha(x1, x2, Y2)`.
    pub b_alpha: Array3<Complex64>,
    pub taylor2: Vec<Array2<Complex64>>,
    pub taylor_alpha: Vec<Array2<Complex64>>,
}

impl BoundaryTrace {
    pub fn zeros(grid: EdgeGrid, order: usize) -> Self {
        let t = vec![Array2::zeros((grid.nx, grid.nx)); order + 1];
        Self {
            grid,
            b2: Array3::zeros((grid.nx, grid.nx, grid.ny)),
            b_alpha: Array3::zeros((grid.nx, grid.nx, grid.ny)),
            taylor2: t.clone(),
            taylor_alpha: t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub iter: usize,
    pub sup_change_b2: f64,
    pub sup_change_balpha: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ConvergenceHistory {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,sup_change_b2,sup_change_balpha\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e}", r.iter, r.sup_change_b2, r.sup_change_balpha);
        }
        out
    }
}

/// `∂u/∂Y` on the given face with the one-sided fourth-order stencil.
pub fn extract_normal_trace(u: &PhysicalField, face: Face) -> Result<Array3<Complex64>> {
    let g = u.grid;
    if g.ny < ONE_SIDED_D1.len() {
        return Err(EdgeError::GridTooCoarse(format!(
            "normal derivative needs {} points, have {}",
            ONE_SIDED_D1.len(),
            g.ny
        )));
    }
    let inv_h = 1.0 / g.hy();
    let mut out = Array3::zeros((g.nx, g.nx, g.ny));
    for (k, w) in ONE_SIDED_D1.iter().enumerate() {
        let slab = match face {
            Face::Y1 => u.data.slice(s![.., .., k, ..]),
            Face::Y2 => u.data.slice(s![.., .., .., k]),
        };
        Zip::from(&mut out).and(&slab).for_each(|o, &v| *o += v * (w * inv_h));
    }
    Ok(out)
}

/// Finite-difference weights for derivatives `0..=m` at `x0` from nodes `xs`
/// (Fornberg's recursion). Row `d` holds the weights of the `d`-th derivative.
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Edge Taylor data `∂^k b/∂Y^k (x, 0)` for `k = 0..=order` from one-sided
/// differences along the last axis.
pub fn taylor_data(trace: &Array3<Complex64>, h: f64, order: usize) -> Vec<Array2<Complex64>> {
    let ny = trace.len_of(Axis(2));
    let npts = (order + TAYLOR_STENCIL_EXTRA).min(ny);
    let xs: Vec<f64> = (0..npts).map(|k| k as f64 * h).collect();
    let w = fd_weights(0.0, &xs, order.min(npts - 1));
    (0..=order)
        .map(|k| {
            let mut out = Array2::zeros((trace.dim().0, trace.dim().1));
            if k < w.len() {
                for (j, wj) in w[k].iter().enumerate() {
                    Zip::from(&mut out)
                        .and(&trace.slice(s![.., .., j]))
                        .for_each(|o, &v| *o += v * *wj);
                }
            }
            out
        })
        .collect()
}

/// Subtracts `b(x, 0) · bump(Y)` so the result vanishes on the edge; returns
/// the largest edge value removed.
pub fn edge_zero_enforce(trace: &Array3<Complex64>, h: f64, width: f64) -> (Array3<Complex64>, f64) {
    let mut out = trace.clone();
    let edge = trace.slice(s![.., .., 0]).to_owned();
    let removed = edge.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if removed == 0.0 {
        return (out, 0.0);
    }
    for (k, mut lane) in out.axis_iter_mut(Axis(2)).enumerate() {
        let w = cutoff::half_bump(k as f64 * h, width);
        if w != 0.0 {
            Zip::from(&mut lane).and(&edge).for_each(|o, &e| *o -= e * w);
        }
    }
    (out, removed)
}

/// Truncated Borel construction: the Taylor polynomial with per-order damped
/// cutoffs near the edge, blended into the given trace away from it.
pub fn borel_mollify(
    trace: &Array3<Complex64>,
    taylor: &[Array2<Complex64>],
    h: f64,
    width: f64,
) -> Array3<Complex64> {
    let widths: Vec<f64> = taylor
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let m = t.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if k == 0 || m == 0.0 {
                width
            } else {
                // keep |t_k| w^k / k! below 2^{-k}
                let cap = (factorial(k) * 0.5f64.powi(k as i32) / m).powf(1.0 / k as f64);
                width.min(cap)
            }
        })
        .collect();
    let mut out = Array3::zeros(trace.raw_dim());
    for (j, mut lane) in out.axis_iter_mut(Axis(2)).enumerate() {
        let y = j as f64 * h;
        let near = cutoff::half_bump(y, width);
        let far_lane = trace.slice(s![.., .., j]);
        Zip::from(&mut lane).and(&far_lane).for_each(|o, &b| *o = b * (1.0 - near));
        if near == 0.0 {
            continue;
        }
        for (k, t) in taylor.iter().enumerate() {
            let c = near * y.powi(k as i32) / factorial(k) * cutoff::half_bump(y, widths[k]);
            if c != 0.0 {
                Zip::from(&mut lane).and(t).for_each(|o, &v| *o += v * c);
            }
        }
    }
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

fn sup_diff(a: &Array3<Complex64>, b: &Array3<Complex64>) -> f64 {
    Zip::from(a).and(b).fold(0.0f64, |m, x, y| m.max((x - y).norm()))
}

/// Diagnostics of one trace construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EdgeRemoval {
    pub b2: f64,
    pub b_alpha: f64,
}

/// Builds admissible traces from a solution: normal derivatives, edge value
/// removal, Taylor data, Borel blend.
pub fn traces_from_solution(
    sol: &ComponentSolution,
    cfg: &EdgeConfig,
) -> Result<(BoundaryTrace, EdgeRemoval)> {
    let grid = sol.u2.grid;
    let h = grid.hy();
    let width = EDGE_BUMP_FRACTION * grid.ly;
    let build = |raw: Array3<Complex64>| {
        let (b, removed) = edge_zero_enforce(&raw, h, width);
        let mut taylor = taylor_data(&b, h, cfg.taylor_order);
        taylor[0].fill(Complex64::new(0.0, 0.0));
        let b = borel_mollify(&b, &taylor, h, width);
        (b, taylor, removed)
    };
    let (b2, taylor2, r2) = build(extract_normal_trace(&sol.u2, Face::Y2)?);
    let (b_alpha, taylor_alpha, ra) = build(extract_normal_trace(&sol.u_alpha, Face::Y1)?);
    Ok((
        BoundaryTrace {
            grid,
            b2,
            b_alpha,
            taylor2,
            taylor_alpha,
        },
        EdgeRemoval { b2: r2, b_alpha: ra },
    ))
}

#[derive(Clone, Debug)]
pub struct FixedPointRun {
    /// Traces used for `solution`.
    pub trace: BoundaryTrace,
    pub solution: ComponentSolution,
    pub history: ConvergenceHistory,
    pub removed: EdgeRemoval,
}

/// Iterates `b ← borel(enforce(extract(solve(f, b))))` from `b = 0` until the
/// sup change is at most `cfg.fp_tol`.
pub fn fixed_point_traces(f: &FormData, cfg: &EdgeConfig) -> Result<FixedPointRun> {
    let grid = f.grid();
    let mut trace = BoundaryTrace::zeros(grid, cfg.taylor_order);
    let mut history = ConvergenceHistory::default();
    let mut last_change = f64::INFINITY;
    for iter in 1..=cfg.fp_max_iter {
        let solution = solver::solve_with_traces(f, &trace, cfg.alpha)?;
        let (next, removed) = traces_from_solution(&solution, cfg)?;
        let row = ConvergenceRow {
            iter,
            sup_change_b2: sup_diff(&next.b2, &trace.b2),
            sup_change_balpha: sup_diff(&next.b_alpha, &trace.b_alpha),
        };
        history.rows.push(row);
        let change = row.sup_change_b2.max(row.sup_change_balpha);
        // α = 0: both coupling terms vanish, so the solution ignores the traces
        if change <= cfg.fp_tol || cfg.alpha == 0.0 {
            let trace = if cfg.alpha == 0.0 { next } else { trace };
            return Ok(FixedPointRun {
                trace,
                solution,
                history,
                removed,
            });
        }
        trace = if change < last_change {
            next
        } else {
            damp(&trace, &next, 0.5)
        };
        last_change = change;
    }
    Err(EdgeError::NonConvergence { history })
}

fn damp(old: &BoundaryTrace, new: &BoundaryTrace, theta: f64) -> BoundaryTrace {
    let mix = |a: &Array3<Complex64>, b: &Array3<Complex64>| a * (1.0 - theta) + b * theta;
    let mix2 = |a: &[Array2<Complex64>], b: &[Array2<Complex64>]| {
        a.iter().zip(b).map(|(x, y)| x * (1.0 - theta) + y * theta).collect()
    };
    BoundaryTrace {
        grid: new.grid,
        b2: mix(&old.b2, &new.b2),
        b_alpha: mix(&old.b_alpha, &new.b_alpha),
        taylor2: mix2(&old.taylor2, &new.taylor2),
        taylor_alpha: mix2(&old.taylor_alpha, &new.taylor_alpha),
    }
}
