//! Fourier-space solution operators for `u_alpha` and `u2`.
//!
//! Each component is odd-reflected across its Dirichlet face and transformed
//! in every variable except the normal of the other face. Along that remaining
//! half line the printed spectral formulas are inverted in closed form: the
//! Green factor becomes an exponential convolution, the reflected and coupling
//! terms become single exponentials given by their residues. Data between grid
//! nodes is taken piecewise linear and every convolution integral is exact for
//! that interpolant.

use ndarray::{s, Array3, Array4, ArrayView1};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{EdgeError, Result};
use crate::geometry::{self, EdgeConfig, EdgeGrid, FormData, PhysicalField, PhysicalPoint};
use crate::spectral::{
    self, odd_reflect_axis, restrict_axis, transform_axis, x_dft, y_dft, Direction, Extension,
    FrequencyGrid, SpectralField, SpectralKind,
};
use crate::traces::{self, BoundaryTrace, ConvergenceHistory};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size below which a frequency-grid denominator aborts the solve.
pub const DENOMINATOR_GUARD: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    /// `u_alpha`: odd in `Y1`, half line in `Y2`.
    Alpha,
    /// `u2`: odd in `Y2`, half line in `Y1`.
    Two,
}

impl Component {
    pub fn reflected_axis(self) -> usize {
        match self {
            Component::Alpha => 2,
            Component::Two => 3,
        }
    }

    pub fn line_axis(self) -> usize {
        5 - self.reflected_axis()
    }
}

/// Frequency-dependent constants of one half-line problem at fixed
/// `(λ1, λ2, η)`, `η` the reflected-axis frequency.
///
/// With `κ` the decay rate and `s` the shift, the reflected symbol is
/// `(ζ/κ) ((ω - s)² + κ²)` in the line frequency `ω`, so `f̂` is evaluated at
/// the root `ω = s - iκ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineSymbol {
    pub zeta: f64,
    pub kappa: f64,
    pub shift: f64,
    /// `λ2` for `u_alpha`, `λ1 - α λ2` for `u2`.
    pub nu: f64,
    pub coupling_pole: Complex64,
    pub coupling_scale: Complex64,
}

impl LineSymbol {
    pub fn new(c: Component, lam1: f64, lam2: f64, eta: f64, alpha: f64) -> Self {
        match c {
            Component::Alpha => {
                let z = spectral::zeta1(lam1, lam2, eta);
                let a = alpha * eta.abs();
                Self {
                    zeta: z,
                    kappa: z,
                    shift: a,
                    nu: lam2,
                    coupling_pole: Complex64::new(a, z),
                    coupling_scale: Complex64::new(0.0, -alpha),
                }
            }
            Component::Two => {
                let z = spectral::zeta2(lam1, lam2, eta, alpha);
                let n = 1.0 + alpha * alpha;
                let c = alpha * eta.abs() / n;
                Self {
                    zeta: z,
                    kappa: z / n,
                    shift: c,
                    nu: lam1 - alpha * lam2,
                    coupling_pole: Complex64::new(c, -z / n),
                    coupling_scale: Complex64::new(0.0, alpha / n),
                }
            }
        }
    }

    /// Complex line frequency at which the reflected symbol vanishes.
    pub fn root(&self) -> Complex64 {
        Complex64::new(self.shift, -self.kappa)
    }

    pub fn symbol(&self, omega: f64) -> f64 {
        let d = omega - self.shift;
        self.zeta / self.kappa * (d * d + self.kappa * self.kappa)
    }

    /// Numerator of the reflected Green term at real line frequency `omega`.
    pub fn reflected_numerator(&self, omega: f64) -> Complex64 {
        Complex64::new(self.nu, self.zeta / self.kappa * (self.shift - omega))
    }

    fn check(&self, scale: f64, location: impl Fn() -> String) -> Result<()> {
        let guard = DENOMINATOR_GUARD * scale.max(1.0);
        let d = (self.nu - self.zeta).abs();
        if d < guard || self.kappa < guard {
            return Err(EdgeError::DenominatorGuard {
                value: d.min(self.kappa),
                guard,
                location: location(),
            });
        }
        Ok(())
    }
}

/// `(e^{-zh}, near, far)`: weights of the exact integral of a linear
/// interpolant against `e^{-z t}` over one cell, split between the node where
/// the exponential equals 1 (near) and the other node (far).
fn exp_weights(z: Complex64, h: f64) -> (Complex64, Complex64, Complex64) {
    let u = z * h;
    let e = (-u).exp();
    if u.norm() < 0.5 {
        // near = h Σ (-u)^m/(m+2)!, far = h Σ (m+1)(-u)^m/(m+2)!
        let mut near = ZERO;
        let mut far = ZERO;
        let mut term = Complex64::new(0.5, 0.0);
        for m in 0..24 {
            near += term;
            far += term * (m as f64 + 1.0);
            term *= -u / (m as f64 + 3.0);
        }
        (e, near * h, far * h)
    } else {
        let r = (1.0 - e) / u;
        (e, (1.0 - r) / z, (r - e) / z)
    }
}

/// Integrals `A(Y_k) = ∫_0^{Y_k} e^{-q(Y_k - s)} f ds` and
/// `B(Y_k) = ∫_{Y_k}^∞ e^{-p(s - Y_k)} f ds` for piecewise-linear `f` that
/// vanishes past the last node.
pub fn exp_convolutions(
    f: ArrayView1<Complex64>,
    h: f64,
    q: Complex64,
    p: Complex64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = f.len();
    let mut a = vec![ZERO; n];
    let mut b = vec![ZERO; n];
    let (eq, nq, fq) = exp_weights(q, h);
    for k in 0..n.saturating_sub(1) {
        a[k + 1] = eq * a[k] + fq * f[k] + nq * f[k + 1];
    }
    let (ep, np, fp) = exp_weights(p, h);
    for k in (0..n.saturating_sub(1)).rev() {
        b[k] = ep * b[k + 1] + np * f[k] + fp * f[k + 1];
    }
    (a, b)
}

/// `∫_0^∞ f(s) e^{-i w s} ds` for complex `w` with `Im w < 0`, exact for the
/// piecewise-linear interpolant of the samples.
pub fn laplace_line(f: ArrayView1<Complex64>, h: f64, w: Complex64) -> Complex64 {
    let p = I * w;
    let (_, b) = exp_convolutions(f, h, p, p);
    b[0]
}

/// Sup norms of the three terms of one component, accumulated over the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct TermNorms {
    pub coupling: f64,
    pub green: f64,
    pub reflected: f64,
}

impl TermNorms {
    fn merge(&mut self, other: TermNorms) {
        self.coupling = self.coupling.max(other.coupling);
        self.green = self.green.max(other.green);
        self.reflected = self.reflected.max(other.reflected);
    }
}

/// Partial inverse of `1/(ω - pole)` on the half line `Y > 0`.
fn pole_inverse(pole: Complex64, y: f64) -> Complex64 {
    if pole.im > 0.0 {
        I * (I * pole * y).exp()
    } else {
        ZERO
    }
}

/// Solution column along the half line for one frequency triple. `out[k]`
/// receives the value at `Y_k = k h`.
pub fn line_solution(
    f: ArrayView1<Complex64>,
    h: f64,
    sym: &LineSymbol,
    b_hat: Complex64,
    out: &mut [Complex64],
) -> TermNorms {
    let p = Complex64::new(sym.kappa, sym.shift);
    let q = Complex64::new(sym.kappa, -sym.shift);
    let (a, b) = exp_convolutions(f, h, q, p);
    let fc = b[0];
    let refl = -fc * (sym.nu + sym.zeta) / (sym.zeta * (sym.nu - sym.zeta));
    let coup = sym.coupling_scale * b_hat / (sym.nu - sym.zeta);
    let decay = Complex64::new(-sym.kappa, sym.shift);
    let mut norms = TermNorms::default();
    for k in 0..out.len() {
        let y = k as f64 * h;
        let green = (a[k] + b[k]) / sym.zeta;
        let r = refl * (decay * y).exp();
        let c = coup * pole_inverse(sym.coupling_pole, y);
        out[k] = green + r + c;
        norms.green = norms.green.max(green.norm());
        norms.reflected = norms.reflected.max(r.norm());
        norms.coupling = norms.coupling.max(c.norm());
    }
    norms
}

/// Transform of a quadrant field in `x1, x2` and in the odd-reflected axis of
/// `component`; the line axis stays physical.
#[derive(Clone, Debug)]
pub struct PartialTransform {
    pub component: Component,
    pub freq: FrequencyGrid,
    pub data: Array4<Complex64>,
}

impl PartialTransform {
    pub fn new(field: &PhysicalField, component: Component) -> Self {
        let grid = field.grid;
        let mut data = field.data.clone();
        let xd = x_dft(&grid);
        transform_axis(&mut data, 0, &xd, Direction::Forward);
        transform_axis(&mut data, 1, &xd, Direction::Forward);
        let ax = component.reflected_axis();
        let mut data = odd_reflect_axis(&data, ax);
        transform_axis(&mut data, ax, &y_dft(&grid), Direction::Forward);
        Self {
            component,
            freq: FrequencyGrid::new(grid),
            data,
        }
    }

    pub fn column(&self, i1: usize, i2: usize, m: usize) -> ArrayView1<'_, Complex64> {
        match self.component {
            Component::Alpha => self.data.slice(s![i1, i2, m, ..]),
            Component::Two => self.data.slice(s![i1, i2, .., m]),
        }
    }

    /// `f̂` at the complex root of the reflected symbol in the line variable.
    pub fn at_root(&self, i1: usize, i2: usize, m: usize, alpha: f64) -> Complex64 {
        let f = &self.freq;
        let sym = LineSymbol::new(self.component, f.lambda[i1], f.lambda[i2], f.eta[m], alpha);
        laplace_line(self.column(i1, i2, m), f.spatial.hy(), sym.root())
    }

    pub fn into_spectral(self) -> SpectralField {
        let kind = match self.component {
            Component::Alpha => SpectralKind::MissingY2,
            Component::Two => SpectralKind::MissingY1,
        };
        SpectralField {
            grid: self.freq,
            kind,
            data: self.data,
        }
    }
}

/// `f̂_alpha^{o1}(λ1, λ2, η1, α|η1| - iζ1)` at grid indices `(i1, i2, m)`.
pub fn f_hat_complex_eta2(
    f_alpha: &PhysicalField,
    alpha: f64,
    i1: usize,
    i2: usize,
    m: usize,
) -> Complex64 {
    PartialTransform::new(f_alpha, Component::Alpha).at_root(i1, i2, m, alpha)
}

/// Transform of a face trace `(x1, x2, Y)` in `x` and in the odd-reflected `Y`.
pub fn trace_transform(trace: &Array3<Complex64>, grid: &EdgeGrid) -> Array3<Complex64> {
    let mut d = trace.clone();
    let xd = x_dft(grid);
    transform_axis(&mut d, 0, &xd, Direction::Forward);
    transform_axis(&mut d, 1, &xd, Direction::Forward);
    let mut d = odd_reflect_axis(&d, 2);
    transform_axis(&mut d, 2, &y_dft(grid), Direction::Forward);
    d
}

fn frequency_scale(freq: &FrequencyGrid) -> f64 {
    let l = freq.lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let e = freq.eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    l.max(e)
}

/// One component on the quadrant grid from its right-hand side and the
/// coupling trace (`b2` for `u_alpha`, `b_alpha` for `u2`).
pub fn solve_component(
    f: &PhysicalField,
    coupling: &Array3<Complex64>,
    component: Component,
    alpha: f64,
) -> Result<(PhysicalField, TermNorms)> {
    let grid = f.grid;
    let pt = PartialTransform::new(f, component);
    let b_hat = trace_transform(coupling, &grid);
    let freq = &pt.freq;
    let scale = frequency_scale(freq);
    let (nx, ny) = (grid.nx, grid.ny);
    let h = grid.hy();
    let mut u = Array4::<Complex64>::zeros(pt.data.raw_dim());
    let mut col = vec![ZERO; ny];
    let mut norms = TermNorms::default();
    for i1 in 0..nx {
        for i2 in 0..nx {
            for m in ny..2 * ny {
                let sym = LineSymbol::new(
                    component,
                    freq.lambda[i1],
                    freq.lambda[i2],
                    freq.eta[m],
                    alpha,
                );
                sym.check(scale, || {
                    format!("{component:?} (i1, i2, m) = ({i1}, {i2}, {m})")
                })?;
                norms.merge(line_solution(pt.column(i1, i2, m), h, &sym, b_hat[[i1, i2, m]], &mut col));
                let mirror = FrequencyGrid::mirror(2 * ny, m);
                let (mut up, mut down) = match component {
                    Component::Alpha => {
                        let (a, b) = u.multi_slice_mut((s![i1, i2, m, ..], s![i1, i2, mirror, ..]));
                        (a, b)
                    }
                    Component::Two => {
                        let (a, b) = u.multi_slice_mut((s![i1, i2, .., m], s![i1, i2, .., mirror]));
                        (a, b)
                    }
                };
                for k in 0..ny {
                    up[k] = col[k];
                    down[k] = -col[k];
                }
            }
        }
    }
    let ax = component.reflected_axis();
    transform_axis(&mut u, ax, &y_dft(&grid), Direction::Inverse);
    let mut u = restrict_axis(&u, ax);
    let xd = x_dft(&grid);
    transform_axis(&mut u, 1, &xd, Direction::Inverse);
    transform_axis(&mut u, 0, &xd, Direction::Inverse);
    Ok((PhysicalField { grid, data: u }, norms))
}

/// Both components for given traces: `u_alpha` from `f_alpha` and `b2`, `u2`
/// from `f2` and `b_alpha`.
#[derive(Clone, Debug)]
pub struct ComponentSolution {
    pub u_alpha: PhysicalField,
    pub u2: PhysicalField,
    pub alpha_terms: TermNorms,
    pub two_terms: TermNorms,
}

pub fn solve_with_traces(
    f: &FormData,
    traces: &BoundaryTrace,
    alpha: f64,
) -> Result<ComponentSolution> {
    let fa = f.f_alpha(alpha);
    let (u_alpha, alpha_terms) = solve_component(&fa, &traces.b2, Component::Alpha, alpha)?;
    let (u2, two_terms) = solve_component(&f.f2, &traces.b_alpha, Component::Two, alpha)?;
    Ok(ComponentSolution {
        u_alpha,
        u2,
        alpha_terms,
        two_terms,
    })
}

/// Three stored terms of one assembled spectral component.
#[derive(Clone, Debug)]
pub struct TermFields {
    pub coupling: Array4<Complex64>,
    pub green: Array4<Complex64>,
    pub reflected: Array4<Complex64>,
}

impl TermFields {
    pub fn total(&self) -> Array4<Complex64> {
        &self.coupling + &self.green + &self.reflected
    }
}

/// Assembles one printed spectral formula on the full frequency grid.
fn assemble(
    f: &PhysicalField,
    coupling: &Array3<Complex64>,
    component: Component,
    alpha: f64,
) -> Result<(SpectralField, TermFields)> {
    let grid = f.grid;
    let freq = FrequencyGrid::new(grid);
    let (y1, y2) = match component {
        Component::Alpha => (Extension::Odd, Extension::HalfLine),
        Component::Two => (Extension::HalfLine, Extension::Odd),
    };
    let f_hat = spectral::forward_transform(&spectral::extend_field(f, y1, y2), &freq)?;
    let pt = PartialTransform::new(f, component);
    let b_hat = trace_transform(coupling, &grid);
    let scale = frequency_scale(&freq);
    let (nx, ny) = (grid.nx, grid.ny);
    let shape = freq.shape();
    let mut terms = TermFields {
        coupling: Array4::zeros(shape),
        green: Array4::zeros(shape),
        reflected: Array4::zeros(shape),
    };
    let h = grid.hy();
    for i1 in 0..nx {
        for i2 in 0..nx {
            for m in ny..2 * ny {
                let sym = LineSymbol::new(component, freq.lambda[i1], freq.lambda[i2], freq.eta[m], alpha);
                sym.check(scale, || format!("{component:?} (i1, i2, m) = ({i1}, {i2}, {m})"))?;
                let fc = laplace_line(pt.column(i1, i2, m), h, sym.root());
                let mirror = FrequencyGrid::mirror(2 * ny, m);
                for (n, &omega) in freq.eta.iter().enumerate() {
                    let idx = match component {
                        Component::Alpha => [i1, i2, m, n],
                        Component::Two => [i1, i2, n, m],
                    };
                    let midx = match component {
                        Component::Alpha => [i1, i2, mirror, n],
                        Component::Two => [i1, i2, n, mirror],
                    };
                    let sigma = sym.symbol(omega);
                    let green = 2.0 / sigma * f_hat.data[idx];
                    let refl =
                        -2.0 / sigma * sym.reflected_numerator(omega) / (sym.nu - sym.zeta) * fc;
                    let coup = sym.coupling_scale * b_hat[[i1, i2, m]]
                        / ((omega - sym.coupling_pole) * (sym.nu - sym.zeta));
                    terms.green[idx] = green;
                    terms.reflected[idx] = refl;
                    terms.coupling[idx] = coup;
                    terms.green[midx] = -green;
                    terms.reflected[midx] = -refl;
                    terms.coupling[midx] = -coup;
                }
            }
        }
    }
    let field = SpectralField {
        grid: freq,
        kind: SpectralKind::Full,
        data: terms.total(),
    };
    Ok((field, terms))
}

/// `û_alpha^{o1}` with its term breakdown.
pub fn assemble_u_alpha_hat(
    f_alpha: &PhysicalField,
    traces: &BoundaryTrace,
    cfg: &EdgeConfig,
) -> Result<(SpectralField, TermFields)> {
    assemble(f_alpha, &traces.b2, Component::Alpha, cfg.alpha)
}

/// `û_2^{o2}` with its term breakdown.
pub fn assemble_u2_hat(
    f2: &PhysicalField,
    traces: &BoundaryTrace,
    cfg: &EdgeConfig,
) -> Result<(SpectralField, TermFields)> {
    assemble(f2, &traces.b_alpha, Component::Two, cfg.alpha)
}

#[derive(Clone, Debug)]
pub struct SpectralSolution {
    pub u_alpha_hat: SpectralField,
    pub u2_hat: SpectralField,
    pub alpha_terms: TermFields,
    pub two_terms: TermFields,
}

pub fn assemble_spectral(
    f: &FormData,
    traces: &BoundaryTrace,
    cfg: &EdgeConfig,
) -> Result<SpectralSolution> {
    let (u_alpha_hat, alpha_terms) = assemble_u_alpha_hat(&f.f_alpha(cfg.alpha), traces, cfg)?;
    let (u2_hat, two_terms) = assemble_u2_hat(&f.f2, traces, cfg)?;
    Ok(SpectralSolution {
        u_alpha_hat,
        u2_hat,
        alpha_terms,
        two_terms,
    })
}

/// Output of the full pipeline. Fields are sampled on the edge-coordinate
/// grid; [`Solution::original_point`] gives the original coordinates of a node.
#[derive(Clone, Debug)]
pub struct Solution {
    pub alpha: f64,
    pub u1: PhysicalField,
    pub u2: PhysicalField,
    pub u_alpha: PhysicalField,
    pub traces: BoundaryTrace,
    pub history: ConvergenceHistory,
    pub alpha_terms: TermNorms,
    pub two_terms: TermNorms,
}

impl Solution {
    pub fn grid(&self) -> EdgeGrid {
        self.u1.grid
    }

    pub fn original_point(&self, a: usize, b: usize, c: usize, d: usize) -> PhysicalPoint {
        let g = self.grid();
        geometry::from_edge_coords(
            PhysicalPoint::edge(g.x(a), g.x(b), g.y(c), g.y(d)),
            self.alpha,
        )
    }
}

/// Fixed-point traces, both components, and `u1 = u_alpha + α u2`.
pub fn solve(f: &FormData, cfg: &EdgeConfig) -> Result<Solution> {
    cfg.validate()?;
    if !f.grid().same_as(&cfg.grid()) {
        return Err(EdgeError::GridMismatch(format!(
            "data grid {:?} vs config grid {:?}",
            f.grid(),
            cfg.grid()
        )));
    }
    f.validate()?;
    let run = traces::fixed_point_traces(f, cfg)?;
    let u1 = geometry::recover_u1(&run.solution.u_alpha, &run.solution.u2, cfg.alpha)?;
    Ok(Solution {
        alpha: cfg.alpha,
        u1,
        u2: run.solution.u2,
        u_alpha: run.solution.u_alpha,
        traces: run.trace,
        history: run.history,
        alpha_terms: run.solution.alpha_terms,
        two_terms: run.solution.two_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use ndarray::Array1;

    #[test]
    fn exp_weights_match_branches() {
        for z in [Complex64::new(0.49, 0.1), Complex64::new(0.3, -0.39)] {
            let h = 1.0;
            let (e, n, f) = exp_weights(z, h);
            let r = (1.0 - e) / z;
            assert!((n - (1.0 - r) / z).norm() < 1e-13);
            assert!((f - (r - e) / z).norm() < 1e-13);
        }
    }

    #[test]
    fn laplace_line_exponential() {
        let h = 1e-3;
        let f: Array1<Complex64> =
            (0..30000).map(|k| Complex64::new((-(k as f64) * h).exp(), 0.0)).collect();
        for zeta in [0.5, 2.0, 10.0] {
            let w = Complex64::new(0.0, -zeta);
            let v = laplace_line(f.view(), h, w);
            let exact = 1.0 / (1.0 + zeta);
            assert!((v.re - exact).abs() / exact < 1e-6, "{zeta}: {v}");
        }
    }

    #[test]
    fn laplace_line_decays_like_inverse_zeta() {
        let h = 0.01;
        let f: Array1<Complex64> = (0..600)
            .map(|k| Complex64::new(crate::cutoff::plateau(k as f64 * h, 2.0, 5.0), 0.0))
            .collect();
        for zeta in [10.0, 100.0, 1000.0] {
            let v = laplace_line(f.view(), h, Complex64::new(1.0, -zeta));
            assert!(v.norm() * zeta < 1.01);
        }
    }

    #[test]
    fn line_solution_matches_frequency_quadrature() {
        // g(Y) = Y e^{-Y} has f̂(ω) = 1/(1 + iω)²; compare the column with the
        // η-integral of the printed formula at one Y.
        let h = 2e-3;
        let f: Array1<Complex64> = (0..20000)
            .map(|k| {
                let y = k as f64 * h;
                Complex64::new(y * (-y).exp(), 0.0)
            })
            .collect();
        let sym = LineSymbol::new(Component::Alpha, 0.7, -0.4, 1.1, 1.0);
        let b = Complex64::new(0.3, -0.2);
        let mut out = vec![ZERO; f.len()];
        line_solution(f.view(), h, &sym, b, &mut out);
        let f_hat = |w: Complex64| (Complex64::new(1.0, 0.0) + I * w).powi(-2);
        let fc = f_hat(sym.root());
        let y = 0.8;
        let k = (y / h).round() as usize;
        let integrand = |w: f64| {
            let s = sym.symbol(w);
            let green = 2.0 / s * f_hat(Complex64::new(w, 0.0));
            let refl = -2.0 / s * sym.reflected_numerator(w) / (sym.nu - sym.zeta) * fc;
            let coup = sym.coupling_scale * b / ((w - sym.coupling_pole) * (sym.nu - sym.zeta));
            (green + refl + coup) * Complex64::from_polar(1.0, w * y) / (2.0 * std::f64::consts::PI)
        };
        // integrate over a wide window; the coupling term decays like 1/ω and
        // is oscillatory, so split the tail by half periods
        let mut total = quadrature::integrate(integrand, -40.0, 40.0, 1e-11, 1e-11, 4000).value;
        let period = std::f64::consts::PI / y;
        let mut a = 40.0;
        let mut sums = Vec::new();
        let mut acc = ZERO;
        for _ in 0..200 {
            let piece = quadrature::integrate(integrand, a, a + period, 1e-12, 1e-12, 200).value
                + quadrature::integrate(integrand, -a - period, -a, 1e-12, 1e-12, 200).value;
            acc += piece;
            sums.push(acc);
            a += period;
        }
        total += quadrature::wynn_epsilon(&sums[sums.len() - 20..]);
        assert!((total - out[k]).norm() < 1e-5, "{total} vs {}", out[k]);
    }

    #[test]
    fn coupling_pole_side() {
        let a = LineSymbol::new(Component::Alpha, 0.3, 0.2, 0.5, 1.0);
        assert!(a.coupling_pole.im > 0.0);
        let t = LineSymbol::new(Component::Two, 0.3, 0.2, 0.5, 1.0);
        assert!(t.coupling_pole.im < 0.0);
        assert_eq!(pole_inverse(t.coupling_pole, 1.0), ZERO);
    }

    #[test]
    fn symbol_root_and_completed_square() {
        for c in [Component::Alpha, Component::Two] {
            let (l1, l2, eta, alpha) = (0.4, -1.3, 0.9, 0.7);
            let s = LineSymbol::new(c, l1, l2, eta, alpha);
            for omega in [-2.0, 0.3, 5.0] {
                let (e1, e2) = match c {
                    Component::Alpha => (eta, omega),
                    Component::Two => (omega, eta),
                };
                let full = spectral::laplace_symbol(
                    l1.into(),
                    l2.into(),
                    e1.into(),
                    e2.into(),
                    alpha,
                );
                assert!((full.re - s.symbol(omega)).abs() < 1e-12);
            }
            let r = s.root();
            let (e1, e2) = match c {
                Component::Alpha => (Complex64::from(eta), r),
                Component::Two => (r, Complex64::from(eta)),
            };
            assert!(spectral::laplace_symbol(l1.into(), l2.into(), e1, e2, alpha).norm() < 1e-12);
        }
    }
}
