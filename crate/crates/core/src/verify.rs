//! Finite-difference checks of solver output: interior equation, the four
//! face conditions, Lᵖ norms over nested boxes, and an independent solver for
//! `alpha = 0`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use ndarray::{s, Array4, Axis};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{EdgeError, Result};
use crate::geometry::{EdgeConfig, EdgeGrid, FormData, PhysicalField};
use crate::traces::ONE_SIDED_D1;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub sup: f64,
    pub l2: f64,
    pub h: f64,
    /// Observed order against a coarser run of the same check.
    pub order: Option<f64>,
}

impl ResidualReport {
    fn new(name: &str, sup: f64, l2: f64, h: f64) -> Self {
        Self {
            name: name.to_string(),
            sup,
            l2,
            h,
            order: None,
        }
    }

    /// Attaches the sup-norm order `log(sup_c/sup_f) / log(h_c/h_f)`.
    pub fn with_order(mut self, coarse: &ResidualReport) -> Self {
        if coarse.h > self.h && self.sup > 0.0 && coarse.sup > 0.0 {
            self.order = Some((coarse.sup / self.sup).ln() / (coarse.h / self.h).ln());
        }
        self
    }
}

pub fn reports_to_csv(reports: &[ResidualReport]) -> String {
    let mut out = String::from("name,sup,l2,h,order\n");
    for r in reports {
        let order = r.order.map(|o| format!("{o:.6}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:e},{:e},{:e},{}", r.name, r.sup, r.l2, r.h, order);
    }
    out
}

/// Index range of nodes at distance `>= margin` (and at least `min_cells`
/// cells) from both ends of an axis with `n` nodes.
fn inner(n: usize, h: f64, margin: f64, min_cells: usize) -> std::ops::Range<usize> {
    let m = ((margin / h - 1e-9).ceil() as usize).max(min_cells);
    m..n.saturating_sub(m)
}

/// Centered second-order `Δ_α u` at an interior node.
fn op_at(u: &Array4<Complex64>, idx: [usize; 4], hx: f64, hy: f64, alpha: f64) -> Complex64 {
    let [a, b, c, d] = idx;
    let u0 = u[idx];
    let dxx = |p: Complex64, m: Complex64| (p - 2.0 * u0 + m) / (hx * hx);
    let dyy = |p: Complex64, m: Complex64| (p - 2.0 * u0 + m) / (hy * hy);
    let x1 = dxx(u[[a + 1, b, c, d]], u[[a - 1, b, c, d]]);
    let x2 = dxx(u[[a, b + 1, c, d]], u[[a, b - 1, c, d]]);
    let y1 = dyy(u[[a, b, c + 1, d]], u[[a, b, c - 1, d]]);
    let y2 = dyy(u[[a, b, c, d + 1]], u[[a, b, c, d - 1]]);
    let y12 = (u[[a, b, c + 1, d + 1]] - u[[a, b, c + 1, d - 1]] - u[[a, b, c - 1, d + 1]]
        + u[[a, b, c - 1, d - 1]])
        / (4.0 * hy * hy);
    x1 + x2 + (1.0 + alpha * alpha) * y1 - 2.0 * alpha * y12 + y2
}

/// Sup and L² norms of `Δ_α u + 2 f` over nodes at distance `>= margin` (and
/// at least 3 cells) from every face.
pub fn interior_residual_component(
    u: &PhysicalField,
    f: &PhysicalField,
    alpha: f64,
    margin: f64,
) -> Result<ResidualReport> {
    u.ensure_same_grid(f)?;
    let g = u.grid;
    let (hx, hy) = (g.hx(), g.hy());
    let rx = inner(g.nx, hx, margin, 3);
    let ry = inner(g.ny, hy, margin, 3);
    if rx.is_empty() || ry.is_empty() {
        return Err(EdgeError::GridTooCoarse(format!(
            "no interior nodes at margin {margin} on {g:?}"
        )));
    }
    // the far Y faces are truncation, not boundary; only Y = 0 needs a margin
    let ry = ry.start..g.ny - 3;
    let mut sup = 0.0f64;
    let mut sum = 0.0;
    for a in rx.clone() {
        for b in rx.clone() {
            for c in ry.clone() {
                for d in ry.clone() {
                    let r = op_at(&u.data, [a, b, c, d], hx, hy, alpha) + 2.0 * f.data[[a, b, c, d]];
                    sup = sup.max(r.norm());
                    sum += r.norm_sqr();
                }
            }
        }
    }
    Ok(ResidualReport::new(
        "interior",
        sup,
        (sum * g.cell_volume()).sqrt(),
        hy.max(hx),
    ))
}

/// Interior residuals of `u_alpha` (against `f_alpha`) and `u2`.
pub fn interior_residual(
    u_alpha: &PhysicalField,
    u2: &PhysicalField,
    f: &FormData,
    alpha: f64,
    margin: f64,
) -> Result<[ResidualReport; 2]> {
    let mut ra = interior_residual_component(u_alpha, &f.f_alpha(alpha), alpha, margin)?;
    let mut r2 = interior_residual_component(u2, &f.f2, alpha, margin)?;
    ra.name = "interior_u_alpha".into();
    r2.name = "interior_u2".into();
    Ok([ra, r2])
}

/// Fourth-order centered first difference along `axis` at `idx`.
fn d_centered(u: &Array4<Complex64>, idx: [usize; 4], axis: usize, h: f64) -> Complex64 {
    let at = |off: isize| {
        let mut j = idx;
        j[axis] = (j[axis] as isize + off) as usize;
        u[j]
    };
    (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h)
}

/// One-sided fourth-order first difference into the domain along a Y axis.
fn d_one_sided(u: &Array4<Complex64>, idx: [usize; 4], axis: usize, h: f64) -> Complex64 {
    ONE_SIDED_D1
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut j = idx;
            j[axis] += k;
            u[j] * *w
        })
        .sum::<Complex64>()
        / h
}

/// Face checks: Dirichlet values of `u_alpha` on `Y1 = 0` and `u2` on
/// `Y2 = 0`, and the two derivative conditions at tangential distance
/// `>= delta` from the edge. Two extra reports give the derivative residuals
/// on the node row nearest the edge.
pub fn boundary_residuals(
    u_alpha: &PhysicalField,
    u2: &PhysicalField,
    alpha: f64,
    delta: f64,
) -> Result<Vec<ResidualReport>> {
    u_alpha.ensure_same_grid(u2)?;
    let g = u_alpha.grid;
    if g.ny < ONE_SIDED_D1.len() + 2 || g.nx < 8 {
        return Err(EdgeError::GridTooCoarse(format!("{g:?}")));
    }
    let (hx, hy) = (g.hx(), g.hy());
    let ua = &u_alpha.data;
    let v = &u2.data;
    let face_area = hx * hx * hy;

    let dir1 = ua.slice(s![.., .., 0, ..]);
    let dir2 = v.slice(s![.., .., .., 0]);
    let norms = |it: &mut dyn Iterator<Item = Complex64>| {
        let mut sup = 0.0f64;
        let mut sum = 0.0;
        for z in it {
            sup = sup.max(z.norm());
            sum += z.norm_sqr();
        }
        (sup, (sum * face_area).sqrt())
    };
    let (s1, l1) = norms(&mut dir1.iter().copied());
    let (s2, l2) = norms(&mut dir2.iter().copied());

    let rx = 2..g.nx - 2;
    let far = g.ny - 2;
    let start = ((delta / hy - 1e-9).ceil() as usize).max(2);
    let a2 = 1.0 + alpha * alpha;
    // (derY1) on Y1 = 0, tangential variable Y2
    let der1 = |a: usize, b: usize, d: usize| {
        let idx = [a, b, 0, d];
        let lhs = -I * alpha * d_one_sided(ua, idx, 2, hy);
        let rhs = d_centered(v, idx, 0, hx) - alpha * d_centered(v, idx, 1, hx)
            + I * (a2 * d_one_sided(v, idx, 2, hy) - alpha * d_centered(v, idx, 3, hy));
        lhs - rhs
    };
    // (derY2) on Y2 = 0, tangential variable Y1
    let der2 = |a: usize, b: usize, c: usize| {
        let idx = [a, b, c, 0];
        d_centered(ua, idx, 1, hx)
            + I * (-alpha * d_centered(ua, idx, 2, hy) + d_one_sided(ua, idx, 3, hy))
            + I * alpha * d_one_sided(v, idx, 3, hy)
    };
    let collect = |f: &dyn Fn(usize, usize, usize) -> Complex64, t: std::ops::Range<usize>| {
        let mut it = rx
            .clone()
            .flat_map(|a| rx.clone().map(move |b| (a, b)))
            .flat_map(|(a, b)| t.clone().map(move |k| (a, b, k)))
            .map(|(a, b, k)| f(a, b, k));
        norms(&mut it)
    };
    let (s3, l3) = collect(&der1, start..far);
    let (s4, l4) = collect(&der2, start..far);
    let (s3e, l3e) = collect(&der1, 2..3);
    let (s4e, l4e) = collect(&der2, 2..3);
    Ok(vec![
        ResidualReport::new("dir1", s1, l1, hy),
        ResidualReport::new("dir2", s2, l2, hy),
        ResidualReport::new("der_y1", s3, l3, hy),
        ResidualReport::new("der_y2", s4, l4, hy),
        ResidualReport::new("der_y1_edge_row", s3e, l3e, hy),
        ResidualReport::new("der_y2_edge_row", s4e, l4e, hy),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpRow {
    pub p: f64,
    /// Box half-widths as a fraction of the grid extents.
    pub level: f64,
    pub norm: f64,
    /// Relative change against the previous level.
    pub change: Option<f64>,
}

/// Discrete Lᵖ norms over nested boxes `|x| <= s L_x`, `Y <= s L_Y`.
pub fn lp_norms(u: &PhysicalField, ps: &[f64], levels: &[f64]) -> Vec<LpRow> {
    let g = u.grid;
    let mut rows = Vec::new();
    for &p in ps {
        let mut prev: Option<f64> = None;
        for &s in levels {
            let (xr, yr) = (s * g.lx, s * g.ly);
            let mut sum = 0.0;
            for ((a, b, c, d), z) in u.data.indexed_iter() {
                if g.x(a).abs() <= xr && g.x(b).abs() <= xr && g.y(c) <= yr && g.y(d) <= yr {
                    sum += z.norm().powf(p);
                }
            }
            let norm = (sum * g.cell_volume()).powf(1.0 / p);
            let change = prev.map(|q| if q > 0.0 { (norm - q).abs() / q } else { 0.0 });
            rows.push(LpRow {
                p,
                level: s,
                norm,
                change,
            });
            prev = Some(norm);
        }
    }
    rows
}

pub fn lp_to_csv(rows: &[LpRow]) -> String {
    let mut out = String::from("p,level,norm,change\n");
    for r in rows {
        let c = r.change.map(|c| format!("{c:e}")).unwrap_or_default();
        let _ = writeln!(out, "{},{},{:e},{}", r.p, r.level, r.norm, c);
    }
    out
}

/// Independent solver for `alpha = 0`, where both components decouple into
/// a Dirichlet problem in one Y variable and a Robin problem in the other.
/// Transforms are direct sums; the Robin Green's function is integrated
/// against the piecewise-linear interpolant element by element.
pub fn alpha_zero_oracle(f: &FormData, cfg: &EdgeConfig) -> Result<(PhysicalField, PhysicalField)> {
    if cfg.alpha != 0.0 {
        return Err(EdgeError::InvalidArgument(format!(
            "oracle requires alpha = 0, got {}",
            cfg.alpha
        )));
    }
    let g = f.grid();
    let u1 = oracle_component(&f.f1, 2, 1, g);
    let u2 = oracle_component(&f.f2, 3, 0, g);
    Ok((u1, u2))
}

/// `dirichlet_axis` carries the sine expansion, the other Y axis the Robin
/// problem whose boundary coefficient is the frequency of x-axis `robin_x`.
fn oracle_component(f: &PhysicalField, dirichlet_axis: usize, robin_x: usize, g: EdgeGrid) -> PhysicalField {
    let (nx, ny) = (g.nx, g.ny);
    let (hx, hy) = (g.hx(), g.hy());
    let dl = PI / g.lx;
    let de = PI / g.ly;
    let lam: Vec<f64> = (0..nx).map(|m| (m as f64 - nx as f64 / 2.0 + 0.5) * dl).collect();
    let eta: Vec<f64> = (0..ny).map(|j| (j as f64 + 0.5) * de).collect();
    let xs: Vec<f64> = (0..nx).map(|k| -g.lx + k as f64 * hx).collect();
    let ys: Vec<f64> = (0..ny).map(|k| k as f64 * hy).collect();

    // x transforms by direct sums
    let fwd_x: Vec<Vec<Complex64>> = lam
        .iter()
        .map(|l| xs.iter().map(|x| Complex64::from_polar(hx, -l * x)).collect())
        .collect();
    let mut w = f.data.clone();
    for axis in 0..2 {
        w = apply_matrix(&w, axis, &fwd_x);
    }
    // sine transform: F(η_j) = -2i h Σ_{k>=1} sin(η_j Y_k) f_k
    let sine: Vec<Vec<Complex64>> = eta
        .iter()
        .map(|e| ys.iter().map(|y| -2.0 * I * hy * (e * y).sin()).collect())
        .collect();
    let mut w = apply_matrix(&w, dirichlet_axis, &sine);

    let robin_axis = 5 - dirichlet_axis;
    let mut col = vec![Complex64::new(0.0, 0.0); ny];
    for a in 0..nx {
        for b in 0..nx {
            for j in 0..ny {
                let lr = if robin_x == 0 { lam[a] } else { lam[b] };
                let zeta = (lam[a] * lam[a] + lam[b] * lam[b] + eta[j] * eta[j]).sqrt();
                let r = (zeta + lr) / (zeta - lr);
                let lane = match robin_axis {
                    3 => w.slice(s![a, b, j, ..]).to_owned(),
                    _ => w.slice(s![a, b, .., j]).to_owned(),
                };
                robin_column(lane.as_slice().unwrap(), hy, zeta, r, &mut col);
                let mut dst = match robin_axis {
                    3 => w.slice_mut(s![a, b, j, ..]),
                    _ => w.slice_mut(s![a, b, .., j]),
                };
                for (d, v) in dst.iter_mut().zip(&col) {
                    *d = *v;
                }
            }
        }
    }

    // inverse sine: u(Y_k) = (Δη/2π) Σ_j 2i sin(η_j Y_k) û_j
    let inv_sine: Vec<Vec<Complex64>> = ys
        .iter()
        .map(|y| eta.iter().map(|e| 2.0 * I * de / (2.0 * PI) * (e * y).sin()).collect())
        .collect();
    let mut w = apply_matrix(&w, dirichlet_axis, &inv_sine);
    let inv_x: Vec<Vec<Complex64>> = xs
        .iter()
        .map(|x| lam.iter().map(|l| Complex64::from_polar(dl / (2.0 * PI), l * x)).collect())
        .collect();
    for axis in 0..2 {
        w = apply_matrix(&w, axis, &inv_x);
    }
    PhysicalField { grid: g, data: w }
}

/// `out_i = Σ_k m[i][k] in_k` along `axis`.
fn apply_matrix(a: &Array4<Complex64>, axis: usize, m: &[Vec<Complex64>]) -> Array4<Complex64> {
    let mut out = Array4::zeros(a.raw_dim());
    for (src, mut dst) in a.lanes(Axis(axis)).into_iter().zip(out.lanes_mut(Axis(axis))) {
        for (i, row) in m.iter().enumerate() {
            dst[i] = row.iter().zip(src.iter()).map(|(w, v)| w * v).sum();
        }
    }
    out
}

/// `∫_0^h e^{-ζt}(1 - t/h) dt` and `∫_0^h e^{-ζt} t/h dt` for real `ζ > 0`.
fn robin_weights(zeta: f64, h: f64) -> (f64, f64) {
    let x = zeta * h;
    let em = (-x).exp();
    let one_minus = -(-x).exp_m1();
    let w1 = (one_minus - x * em) / (zeta * x);
    let w0 = one_minus / zeta - w1;
    (w0, w1)
}

/// `u(Y) = (1/ζ) ∫_0^∞ [e^{-ζ|Y-s|} + R e^{-ζ(Y+s)}] f(s) ds`, solving
/// `-u'' + ζ²u = 2f` with `u'(0) = -ν u(0)`, `R = (ζ+ν)/(ζ-ν)`.
fn robin_column(f: &[Complex64], h: f64, zeta: f64, r: f64, out: &mut [Complex64]) {
    let n = f.len();
    let (w0, w1) = robin_weights(zeta, h);
    let decay = |d: f64| (-zeta * d).exp();
    let mut fc = Complex64::new(0.0, 0.0);
    for k in 0..n - 1 {
        fc += decay(k as f64 * h) * (f[k] * w0 + f[k + 1] * w1);
    }
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n - 1 {
            acc += if k >= j {
                decay((k - j) as f64 * h) * (f[k] * w0 + f[k + 1] * w1)
            } else {
                decay((j - k - 1) as f64 * h) * (f[k + 1] * w0 + f[k] * w1)
            };
        }
        *o = (acc + r * decay(j as f64 * h) * fc) / zeta;
    }
}

/// `|∂u2/∂Y2 - ∂u_alpha/∂Y1|` and both values at the edge node row, sup over
/// `|x| <= x_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EdgeConsistency {
    pub d_u2: f64,
    pub d_u_alpha: f64,
    pub mismatch: f64,
    pub h: f64,
}

pub fn edge_consistency(u_alpha: &PhysicalField, u2: &PhysicalField) -> Result<EdgeConsistency> {
    u_alpha.ensure_same_grid(u2)?;
    let g = u2.grid;
    let hy = g.hy();
    let mut out = EdgeConsistency {
        d_u2: 0.0,
        d_u_alpha: 0.0,
        mismatch: 0.0,
        h: hy,
    };
    for a in 0..g.nx {
        for b in 0..g.nx {
            let idx = [a, b, 0, 0];
            let d2 = d_one_sided(&u2.data, idx, 3, hy);
            let da = d_one_sided(&u_alpha.data, idx, 2, hy);
            out.d_u2 = out.d_u2.max(d2.norm());
            out.d_u_alpha = out.d_u_alpha.max(da.norm());
            out.mismatch = out.mismatch.max((d2 - da).norm());
        }
    }
    Ok(out)
}
