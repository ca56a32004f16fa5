//! Least-squares fit of the edge profile against the four singular
//! functions `log(Y1² + c²Y2²)`, `log(c²Y1² + Y2²)`, `arctan(Y1/(cY2))`,
//! `arctan(cY1/Y2)`, each with a polynomial coefficient, plus a smooth
//! polynomial.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use num_complex::Complex64;

use super::basis::{arctan, arctan_q, edge_c, log_q};
use crate::geometry::PhysicalField;
use crate::{EdgeError, Result};

/// Fits with a squared condition number above this are flagged unreliable.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Annulus `r_min <= |(Y1, Y2)| <= r_max` around the edge and model sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub r_min: f64,
    pub r_max: f64,
    /// Degree of the polynomial multiplying each singular function.
    pub degree: u32,
    pub smooth_degree: u32,
    /// Relative singular-value cutoff of the least-squares solve.
    pub fit_tol: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            r_min: 0.1,
            r_max: 0.8,
            degree: 1,
            smooth_degree: 2,
            fit_tol: 1e-12,
        }
    }
}

impl FitWindow {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0) {
            return Err(EdgeError::FitWindow("window must not touch the edge (r_min > 0)".into()));
        }
        if !(self.r_max > self.r_min) {
            return Err(EdgeError::FitWindow(format!(
                "empty annulus: r_min = {}, r_max = {}",
                self.r_min, self.r_max
            )));
        }
        if !(self.fit_tol > 0.0 && self.fit_tol < 1.0) {
            return Err(EdgeError::FitWindow(format!("fit_tol must lie in (0, 1), got {}", self.fit_tol)));
        }
        Ok(())
    }
}

/// The four singular functions; index 1 and 3 coincide with 0 and 2 at α = 0.
pub fn singular_function(kind: usize, alpha: f64, y1: f64, y2: f64) -> Complex64 {
    let c = edge_c(alpha);
    match kind {
        0 => log_q(alpha, y1, y2),
        1 => (c * c * y1 * y1 + y2 * y2).ln(),
        2 => arctan_q(alpha, y1, y2),
        _ => {
            if y2 == 0.0 {
                arctan_q(0.0, y1, 0.0)
            } else {
                arctan(c * y1 / y2)
            }
        }
    }
}

pub const SINGULAR_NAMES: [&str; 4] = ["a1", "a2", "b1", "b2"];

fn monomials(degree: u32) -> Vec<(u32, u32)> {
    (0..=degree)
        .flat_map(|d| (0..=d).rev().map(move |i| (i, d - i)))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SingularFit {
    pub alpha: f64,
    pub window: FitWindow,
    pub monomials: Vec<(u32, u32)>,
    pub smooth_monomials: Vec<(u32, u32)>,
    /// Polynomial coefficients per singular function, in `monomials` order.
    /// Functions that duplicate another at α = 0 are left at zero.
    pub singular: [Vec<Complex64>; 4],
    pub smooth: Vec<Complex64>,
    pub active: [bool; 4],
    pub points: usize,
    pub residual_max: f64,
    pub residual_rms: f64,
    /// Squared condition number of the column-scaled design matrix.
    pub condition: f64,
    pub rank: usize,
    pub reliable: bool,
}

impl SingularFit {
    /// Constant term of the coefficient of singular function `kind`.
    pub fn leading(&self, kind: usize) -> Complex64 {
        self.singular[kind][0]
    }

    pub fn eval_singular(&self, y1: f64, y2: f64) -> Complex64 {
        let mut v = Complex64::default();
        for (kind, coeffs) in self.singular.iter().enumerate() {
            if !self.active[kind] {
                continue;
            }
            let p: Complex64 = self
                .monomials
                .iter()
                .zip(coeffs)
                .map(|(&(i, j), c)| c * y1.powi(i as i32) * y2.powi(j as i32))
                .sum();
            if p != Complex64::default() {
                v += p * singular_function(kind, self.alpha, y1, y2);
            }
        }
        v
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Complex64 {
        let s: Complex64 = self
            .smooth_monomials
            .iter()
            .zip(&self.smooth)
            .map(|(&(i, j), c)| c * y1.powi(i as i32) * y2.powi(j as i32))
            .sum();
        s + self.eval_singular(y1, y2)
    }

    /// Largest singular-coefficient magnitude.
    pub fn max_singular_coeff(&self) -> f64 {
        self.singular
            .iter()
            .flatten()
            .fold(0.0, |m, c| m.max(c.norm()))
    }
}

/// Fits samples `(Y1, Y2, u)`; points outside the window are ignored.
pub fn fit_samples(samples: &[(f64, f64, Complex64)], alpha: f64, window: &FitWindow) -> Result<SingularFit> {
    window.validate()?;
    let pts: Vec<_> = samples
        .iter()
        .copied()
        .filter(|(y1, y2, _)| {
            let r = y1.hypot(*y2);
            r >= window.r_min && r <= window.r_max
        })
        .collect();
    let active = if alpha == 0.0 {
        [true, false, true, false]
    } else {
        [true; 4]
    };
    let mono = monomials(window.degree);
    let smooth_mono = monomials(window.smooth_degree);
    let ncol = active.iter().filter(|a| **a).count() * mono.len() + smooth_mono.len();
    if pts.len() < ncol {
        return Err(EdgeError::FitWindow(format!(
            "window holds {} grid points but the model has {} unknowns",
            pts.len(),
            ncol
        )));
    }
    // monomials in Y / r_max keep the columns comparable
    let scale = window.r_max;
    let mut design = DMatrix::<Complex64>::zeros(pts.len(), ncol);
    let mut rhs = DVector::<Complex64>::zeros(pts.len());
    for (row, &(y1, y2, u)) in pts.iter().enumerate() {
        let (s1, s2) = (y1 / scale, y2 / scale);
        let mut col = 0;
        for (kind, _) in active.iter().enumerate().filter(|(_, a)| **a) {
            let s = singular_function(kind, alpha, y1, y2);
            for &(i, j) in &mono {
                design[(row, col)] = s * s1.powi(i as i32) * s2.powi(j as i32);
                col += 1;
            }
        }
        for &(i, j) in &smooth_mono {
            design[(row, col)] = Complex64::from(s1.powi(i as i32) * s2.powi(j as i32));
            col += 1;
        }
        rhs[row] = u;
    }
    let norms: Vec<f64> = (0..ncol).map(|j| design.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    for (j, n) in norms.iter().enumerate() {
        design.column_mut(j).scale_mut(1.0 / n);
    }
    let svd = design.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cut = window.fit_tol * smax;
    let u_mat = svd.u.as_ref().expect("svd computed with U");
    let v_t = svd.v_t.as_ref().expect("svd computed with V^T");
    let proj = u_mat.adjoint() * &rhs;
    let mut y = DVector::<Complex64>::zeros(ncol);
    let mut rank = 0;
    for k in 0..sv.len() {
        if sv[k] > cut {
            y[k] = proj[k] / sv[k];
            rank += 1;
        }
    }
    let x = v_t.adjoint() * y;
    let resid = &rhs - &design * &x;
    let residual_max = resid.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let residual_rms = (resid.norm_squared() / pts.len() as f64).sqrt();
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };

    let unscale = |col: usize, (i, j): (u32, u32)| x[col] / (norms[col] * scale.powi((i + j) as i32));
    let mut singular: [Vec<Complex64>; 4] = Default::default();
    let mut col = 0;
    for kind in 0..4 {
        singular[kind] = vec![Complex64::default(); mono.len()];
        if !active[kind] {
            continue;
        }
        for (m, &ij) in mono.iter().enumerate() {
            singular[kind][m] = unscale(col, ij);
            col += 1;
        }
    }
    let smooth = smooth_mono
        .iter()
        .map(|&ij| {
            let v = unscale(col, ij);
            col += 1;
            v
        })
        .collect();
    Ok(SingularFit {
        alpha,
        window: *window,
        monomials: mono,
        smooth_monomials: smooth_mono,
        singular,
        smooth,
        active,
        points: pts.len(),
        residual_max,
        residual_rms,
        condition,
        rank,
        reliable: condition < CONDITION_LIMIT && rank == ncol,
    })
}

/// The `(Y1, Y2)` slice of `u` at x-indices `(a, b)`.
pub fn edge_slice(u: &PhysicalField, a: usize, b: usize) -> Result<Array2<Complex64>> {
    let (nx, _, _, _) = u.data.dim();
    if a >= nx || b >= nx {
        return Err(EdgeError::InvalidArgument(format!("base point ({a}, {b}) outside the x grid")));
    }
    Ok(u.data.slice(ndarray::s![a, b, .., ..]).to_owned())
}

/// Fits the slice of `u` at x-indices `(a, b)`.
pub fn fit_singularities(
    u: &PhysicalField,
    alpha: f64,
    base: (usize, usize),
    window: &FitWindow,
) -> Result<SingularFit> {
    let slice = edge_slice(u, base.0, base.1)?;
    let h = u.grid.hy();
    let samples: Vec<_> = slice
        .indexed_iter()
        .map(|((i, j), v)| (i as f64 * h, j as f64 * h, *v))
        .collect();
    fit_samples(&samples, alpha, window)
}

/// Largest first difference `|Δu| / h` between neighbouring nodes inside
/// `r <= r_max`, skipping the edge node itself.
pub fn edge_gradient(slice: &Array2<Complex64>, h: f64, r_max: f64) -> f64 {
    let (n1, n2) = slice.dim();
    let inside = |i: usize, j: usize| {
        let r = (i as f64 * h).hypot(j as f64 * h);
        (i, j) != (0, 0) && r <= r_max
    };
    let mut best = 0.0f64;
    for i in 0..n1 {
        for j in 0..n2 {
            if !inside(i, j) {
                continue;
            }
            if i + 1 < n1 && inside(i + 1, j) {
                best = best.max((slice[[i + 1, j]] - slice[[i, j]]).norm() / h);
            }
            if j + 1 < n2 && inside(i, j + 1) {
                best = best.max((slice[[i, j + 1]] - slice[[i, j]]).norm() / h);
            }
        }
    }
    best
}

/// `slice - fit.eval_singular` on the grid; the edge node is set to zero.
pub fn subtract_singular(slice: &Array2<Complex64>, h: f64, fit: &SingularFit) -> Array2<Complex64> {
    let mut out = slice.clone();
    for ((i, j), v) in out.indexed_iter_mut() {
        if (i, j) == (0, 0) {
            *v = Complex64::default();
        } else {
            *v -= fit.eval_singular(i as f64 * h, j as f64 * h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(h: f64, n: usize, f: impl Fn(f64, f64) -> Complex64) -> Vec<(f64, f64, Complex64)> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let (y1, y2) = (i as f64 * h, j as f64 * h);
                v.push((y1, y2, f(y1, y2)));
            }
        }
        v
    }

    #[test]
    fn recovers_log_at_alpha_zero() {
        let samples = lattice(0.025, 40, |y1, y2| Complex64::from((y1 * y1 + y2 * y2).ln()));
        let fit = fit_samples(&samples, 0.0, &FitWindow::default()).unwrap();
        assert!(fit.condition < 1e6, "κ² = {:e}", fit.condition);
        assert!((fit.leading(0) - 1.0).norm() < 1e-8);
        assert!(fit.leading(2).norm() < 1e-8);
        assert!(fit.residual_max < 1e-10);
        assert!(fit.singular[1].iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn recovers_a_mixed_combination_at_alpha_one() {
        let alpha = 1.0;
        let want = [
            Complex64::new(0.3, -0.2),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.4),
        ];
        let samples = lattice(0.025, 40, |y1, y2| {
            (0..4).map(|k| want[k] * singular_function(k, alpha, y1, y2)).sum::<Complex64>()
                + Complex64::new(1.0 + y1, y2 * y2)
        });
        // constant singular coefficients keep the four functions well separated
        let window = FitWindow {
            degree: 0,
            ..FitWindow::default()
        };
        let fit = fit_samples(&samples, alpha, &window).unwrap();
        assert!(fit.condition < 1e6, "κ² = {:e}", fit.condition);
        for k in 0..4 {
            assert!((fit.leading(k) - want[k]).norm() < 1e-8, "{k}: {}", fit.leading(k));
        }
        // the richer default model is ill-conditioned here and says so
        let rich = fit_samples(&samples, alpha, &FitWindow::default()).unwrap();
        assert!(rich.condition > 1e6);
        assert!(rich.residual_max < 1e-8);
    }

    #[test]
    fn smooth_field_has_no_singular_part() {
        let samples = lattice(0.025, 40, |y1, y2| Complex64::new(1.0 + y1 * y2, y2));
        let fit = fit_samples(&samples, 0.0, &FitWindow::default()).unwrap();
        assert!(fit.max_singular_coeff() < 1e-8);
    }

    #[test]
    fn window_errors() {
        let samples = lattice(0.1, 3, |_, _| Complex64::default());
        let mut w = FitWindow::default();
        w.r_min = 0.0;
        assert!(matches!(fit_samples(&samples, 0.0, &w), Err(EdgeError::FitWindow(_))));
        // too few points for the unknowns
        assert!(matches!(
            fit_samples(&samples, 1.0, &FitWindow::default()),
            Err(EdgeError::FitWindow(_))
        ));
    }

    #[test]
    fn subtraction_flattens_the_gradient() {
        let f = |y1: f64, y2: f64| Complex64::from(y1 * (y1 * y1 + y2 * y2).ln());
        let h = 0.02;
        let slice = Array2::from_shape_fn((50, 50), |(i, j)| f(i as f64 * h, j as f64 * h));
        let samples: Vec<_> = slice.indexed_iter().map(|((i, j), v)| (i as f64 * h, j as f64 * h, *v)).collect();
        let fit = fit_samples(&samples, 0.0, &FitWindow::default()).unwrap();
        let rem = subtract_singular(&slice, h, &fit);
        assert!(edge_gradient(&rem, h, 0.5) < 0.2 * edge_gradient(&slice, h, 0.5));
    }
}
