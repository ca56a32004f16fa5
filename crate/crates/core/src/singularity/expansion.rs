//! High-frequency expansion of `û_alpha^{o1}`.
//!
//! Every factor of the spectral formula is expanded in `x = 1/|η1|`, powers
//! of `η2` and powers of `σ' = (η2 - α|η1|)² + η1²`, with `λ`-dependent
//! coefficients built from the edge jets of the data. Terms are kept while
//! their joint decay degree `a + j + 2m` is at most `2n + 4`; the remainder
//! then decays like `|η|^{-(2n+5)}`.
//!
//! Every surviving term carries exactly one factor `sign(η1)` from the odd
//! reflection, so `x^a sign(η1) = |η1|^{-k} η1^{-(2l-1)}` with `a = 2l-1+k`
//! and `k ∈ {0, 1}`. Terms are tagged with these actual exponents.

use std::collections::BTreeMap;

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;

use crate::geometry::{EdgeConfig, FormData, PhysicalField};
use crate::spectral::{transform_axis, x_dft, Direction, FrequencyGrid};
use crate::traces::{fd_weights, taylor_data, BoundaryTrace};
use crate::{EdgeError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Highest derivative order taken from the grid by one-sided differences.
pub const MAX_JET_ORDER: usize = 6;
/// Extra stencil points beyond the derivative order.
const JET_STENCIL_EXTRA: usize = 4;

/// Edge jets in `λ`-space: x-transforms of corner derivatives.
#[derive(Clone, Debug)]
pub struct EdgeJets {
    pub lambda: Vec<f64>,
    /// `f[a][b]`: transform of `∂_{Y1}^a ∂_{Y2}^b f_alpha` at `Y = 0`.
    pub f: Vec<Vec<Array2<Complex64>>>,
    /// `b[k]`: transform of `∂_{Y1}^k b2` at `Y1 = 0`.
    pub b: Vec<Array2<Complex64>>,
}

impl EdgeJets {
    pub fn order(&self) -> usize {
        self.f.len().saturating_sub(1)
    }

    fn lambda_shape(&self) -> (usize, usize) {
        (self.lambda.len(), self.lambda.len())
    }

    /// Jets of `f_alpha` and `b2` up to total order `order`.
    pub fn from_grid(f_alpha: &PhysicalField, b2: &Array3<Complex64>, order: usize) -> Result<Self> {
        let grid = f_alpha.grid;
        let npts = order + JET_STENCIL_EXTRA;
        if order > MAX_JET_ORDER || 2 * npts > grid.ny {
            return Err(EdgeError::ExpansionOrder {
                order,
                reason: format!(
                    "edge jets are not resolved on ny = {} (limit {MAX_JET_ORDER}, stencil {npts})",
                    grid.ny
                ),
            });
        }
        let h = grid.hy();
        let xs: Vec<f64> = (0..npts).map(|k| k as f64 * h).collect();
        let w = fd_weights(0.0, &xs, order);
        let xd = x_dft(&grid);
        let to_lambda = |mut a: Array2<Complex64>| {
            transform_axis(&mut a, 0, &xd, Direction::Forward);
            transform_axis(&mut a, 1, &xd, Direction::Forward);
            a
        };
        let nx = grid.nx;
        let mut f = Vec::with_capacity(order + 1);
        for a in 0..=order {
            let mut row = Vec::new();
            for b in 0..=order - a {
                let mut d = Array2::<Complex64>::zeros((nx, nx));
                for (k1, w1) in w[a].iter().enumerate() {
                    for (k2, w2) in w[b].iter().enumerate() {
                        let c = w1 * w2;
                        if c != 0.0 {
                            d.scaled_add(c.into(), &f_alpha.data.slice(ndarray::s![.., .., k1, k2]));
                        }
                    }
                }
                row.push(to_lambda(d));
            }
            f.push(row);
        }
        let b = taylor_data(b2, h, order).into_iter().map(to_lambda).collect();
        Ok(Self {
            lambda: FrequencyGrid::new(grid).lambda,
            f,
            b,
        })
    }

    fn f_jet(&self, a: usize, b: usize) -> Option<&Array2<Complex64>> {
        self.f.get(a).and_then(|r| r.get(b))
    }
}

/// Which printed term a series term came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum TermSource {
    Green,
    Reflected,
    Coupling,
}

/// `c(λ) η2^{-j} |η1|^{-k} η1^{-(2l-1)} σ'^{-m}`.
#[derive(Clone, Debug)]
pub struct AsymptoticTerm {
    pub source: TermSource,
    pub j: i32,
    pub k: i32,
    pub l: i32,
    pub m: i32,
    pub coefficient: Array2<Complex64>,
}

impl AsymptoticTerm {
    /// Joint decay degree in `η`.
    pub fn degree(&self) -> i32 {
        self.j + self.k + 2 * self.l - 1 + 2 * self.m
    }

    pub fn max_coefficient(&self) -> f64 {
        self.coefficient.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn eval(&self, i1: usize, i2: usize, eta1: f64, eta2: f64, alpha: f64) -> Complex64 {
        let s = eta2 - alpha * eta1.abs();
        let sigma = s * s + eta1 * eta1;
        self.coefficient[[i1, i2]]
            * eta2.powi(-self.j)
            * eta1.abs().powi(-self.k)
            * eta1.powi(-(2 * self.l - 1))
            * sigma.powi(-self.m)
    }
}

#[derive(Clone, Debug)]
pub struct Expansion {
    pub alpha: f64,
    pub order: usize,
    /// Terms up to this joint degree are kept.
    pub degree_limit: i32,
    pub terms: Vec<AsymptoticTerm>,
}

impl Expansion {
    pub fn eval(&self, i1: usize, i2: usize, eta1: f64, eta2: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(i1, i2, eta1, eta2, self.alpha)).sum()
    }

    /// Decay envelope `|η|^{-(limit+1)}` of the omitted remainder.
    pub fn remainder_envelope(&self, eta1: f64, eta2: f64) -> f64 {
        eta1.hypot(eta2).powi(-(self.degree_limit + 1))
    }
}

// (a, j, m): x^a η2^{-j} σ'^{-m}
type Key = (i32, i32, i32);

#[derive(Clone, Debug)]
struct Series {
    shape: (usize, usize),
    limit: i32,
    terms: BTreeMap<Key, Array2<Complex64>>,
}

fn degree((a, j, m): Key) -> i32 {
    a + j + 2 * m
}

impl Series {
    fn new(shape: (usize, usize), limit: i32) -> Self {
        Self {
            shape,
            limit,
            terms: BTreeMap::new(),
        }
    }

    fn add(&mut self, key: Key, c: Array2<Complex64>) {
        if degree(key) > self.limit {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => *v += &c,
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn add_scalar(&mut self, key: Key, c: Complex64) {
        let a = Array2::from_elem(self.shape, c);
        self.add(key, a);
    }

    fn mul(&self, other: &Series) -> Series {
        let mut out = Series::new(self.shape, self.limit.min(other.limit));
        for (&(a1, j1, m1), c1) in &self.terms {
            for (&(a2, j2, m2), c2) in &other.terms {
                out.add((a1 + a2, j1 + j2, m1 + m2), c1 * c2);
            }
        }
        out
    }

    fn scale(&self, s: Complex64) -> Series {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            v.mapv_inplace(|z| z * s);
        }
        out
    }

    /// Inverse of a pure power series in `x` with an invertible `x^0` term.
    fn x_inverse(&self, max_a: i32) -> Series {
        let zero = Array2::zeros(self.shape);
        let coeff = |a: i32| self.terms.get(&(a, 0, 0)).cloned().unwrap_or_else(|| zero.clone());
        let c0 = coeff(0);
        let inv0 = c0.mapv(|z| 1.0 / z);
        let mut b: Vec<Array2<Complex64>> = vec![inv0.clone()];
        for n in 1..=max_a {
            let mut acc = zero.clone();
            for k in 1..=n {
                acc += &(coeff(k) * &b[(n - k) as usize]);
            }
            b.push(-(acc * &inv0));
        }
        let mut out = Series::new(self.shape, self.limit);
        for (n, c) in b.into_iter().enumerate() {
            out.add((n as i32, 0, 0), c);
        }
        out
    }
}

fn binomial(p: f64, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (p - i as f64) / (i as f64 + 1.0))
}

struct Profiles {
    shape: (usize, usize),
    lam_sq: Array2<Complex64>,
    lam2: Array2<Complex64>,
}

impl Profiles {
    fn new(lambda: &[f64]) -> Self {
        let n = lambda.len();
        Self {
            shape: (n, n),
            lam_sq: Array2::from_shape_fn((n, n), |(a, b)| (lambda[a].powi(2) + lambda[b].powi(2)).into()),
            lam2: Array2::from_shape_fn((n, n), |(_, b)| lambda[b].into()),
        }
    }

    /// `1/σ = Σ_s (-λ²)^s σ'^{-(s+1)}`.
    fn sigma_inverse(&self, limit: i32) -> Series {
        let mut s = Series::new(self.shape, limit);
        let mut pow = Array2::from_elem(self.shape, Complex64::new(1.0, 0.0));
        for m in 1..=limit / 2 + 1 {
            s.add((0, 0, m), pow.clone());
            pow = pow * self.lam_sq.mapv(|z| -z);
        }
        s
    }

    /// `(1 + λ² x²)^p` as a series in `x²`, times `x^shift`.
    fn radical(&self, p: f64, shift: i32, limit: i32) -> Series {
        let mut s = Series::new(self.shape, limit);
        let mut pow = Array2::from_elem(self.shape, Complex64::new(1.0, 0.0));
        let mut r = 0;
        while shift + 2 * r as i32 <= limit {
            s.add((shift + 2 * r as i32, 0, 0), pow.mapv(|z| z * binomial(p, r)));
            pow = &pow * &self.lam_sq;
            r += 1;
        }
        s
    }

    /// `ζ1 = |η1| (1 + λ²x²)^{1/2}`.
    fn zeta(&self, limit: i32) -> Series {
        self.radical(0.5, -1, limit)
    }

    /// `1/(λ2 - ζ1) = -Σ_t λ2^t ζ1^{-(t+1)}`.
    fn nu_minus_zeta_inverse(&self, limit: i32) -> Series {
        let mut s = Series::new(self.shape, limit);
        let mut pow = Array2::from_elem(self.shape, Complex64::new(-1.0, 0.0));
        let mut t = 0;
        while t + 1 <= limit {
            let r = self.radical(-0.5 * (t as f64 + 1.0), t + 1, limit);
            for (k, c) in r.terms {
                s.add(k, c * &pow);
            }
            pow = &pow * &self.lam2;
            t += 1;
        }
        s
    }
}

/// Asymptotic terms of `û_alpha^{o1}` of order `n` from explicit jets.
pub fn expand_jets(jets: &EdgeJets, alpha: f64, n: usize) -> Result<Expansion> {
    let limit = 2 * n as i32 + 4;
    let need = 2 * n;
    if jets.order() < need || jets.b.len() < need + 1 {
        return Err(EdgeError::ExpansionOrder {
            order: n,
            reason: format!("needs edge jets of order {need}, have {}", jets.order()),
        });
    }
    let pr = Profiles::new(&jets.lambda);
    let shape = jets.lambda_shape();
    let work = limit + 4;
    let sigma_inv = pr.sigma_inverse(work);
    let nz_inv = pr.nu_minus_zeta_inverse(work);
    let zeta = pr.zeta(work);

    // ∂2^q f̂^{o1}(λ, η1, Y2 = 0) ~ Σ_p -2i(-1)^p ∂1^{2p}∂2^q f x^{2p+1}
    let f_odd = |q: usize| {
        let mut s = Series::new(shape, work);
        for p in 0..=need / 2 {
            if let Some(c) = jets.f_jet(2 * p, q) {
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                s.add((2 * p as i32 + 1, 0, 0), c.mapv(|z| -2.0 * I * sign * z));
            }
        }
        s
    };

    let mut green = Series::new(shape, work);
    for q in 0..=need {
        // (iη2)^{-(q+1)}
        let mut e = Series::new(shape, work);
        e.add_scalar((0, q as i32 + 1, 0), (-I).powu(q as u32 + 1));
        let t = f_odd(q).mul(&e);
        for (k, c) in t.terms {
            green.add(k, c);
        }
    }
    let green = green.mul(&sigma_inv).scale(2.0.into());

    // f̂ at η2 = α|η1| - iζ1: Σ_q ∂2^q f̂ (iα|η1| + ζ1)^{-(q+1)}
    let mut denom = zeta.clone();
    denom.add_scalar((-1, 0, 0), I * alpha);
    // x · (iα + ζ1 x)^{-1}
    let mut shifted = Series::new(shape, work);
    for (&(a, j, m), c) in &denom.terms {
        shifted.add((a + 1, j, m), c.clone());
    }
    let mut inv_iw = shifted.x_inverse(work);
    inv_iw.terms = inv_iw.terms.into_iter().map(|((a, j, m), c)| ((a + 1, j, m), c)).collect();
    let mut fc = Series::new(shape, work);
    let mut pow = inv_iw.clone();
    for q in 0..=need {
        let t = f_odd(q).mul(&pow);
        for (k, c) in t.terms {
            fc.add(k, c);
        }
        pow = pow.mul(&inv_iw);
    }
    // numerator λ2 + iα|η1| - iη2
    let mut num = Series::new(shape, work);
    num.add((0, 0, 0), pr.lam2.clone());
    num.add_scalar((-1, 0, 0), I * alpha);
    num.add_scalar((0, -1, 0), -I);
    let reflected = sigma_inv.mul(&num).mul(&nz_inv).mul(&fc).scale((-2.0).into());

    // -iα b̂ (η2 - α|η1| + iζ1) / (σ (λ2 - ζ1))
    let mut b_odd = Series::new(shape, work);
    for p in 0..=need / 2 {
        if let Some(c) = jets.b.get(2 * p) {
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            b_odd.add((2 * p as i32 + 1, 0, 0), c.mapv(|z| -2.0 * I * sign * z));
        }
    }
    let mut conj_root = zeta.scale(I);
    conj_root.add_scalar((0, -1, 0), Complex64::new(1.0, 0.0));
    conj_root.add_scalar((-1, 0, 0), Complex64::new(-alpha, 0.0));
    let coupling = conj_root
        .mul(&sigma_inv)
        .mul(&nz_inv)
        .mul(&b_odd)
        .scale(Complex64::new(0.0, -alpha));

    let mut terms = Vec::new();
    for (source, s) in [
        (TermSource::Green, green),
        (TermSource::Reflected, reflected),
        (TermSource::Coupling, coupling),
    ] {
        for ((a, j, m), c) in s.terms {
            if a + j + 2 * m > limit {
                continue;
            }
            let k = (a + 1).rem_euclid(2);
            let l = (a - k + 1) / 2;
            terms.push(AsymptoticTerm {
                source,
                j,
                k,
                l,
                m,
                coefficient: c,
            });
        }
    }
    Ok(Expansion {
        alpha,
        order: n,
        degree_limit: limit,
        terms,
    })
}

/// Expansion of the solver's `û_alpha^{o1}` with jets read off the grid.
pub fn expand_terms(
    f: &FormData,
    traces: &BoundaryTrace,
    cfg: &EdgeConfig,
    n: usize,
) -> Result<Expansion> {
    let fa = f.f_alpha(cfg.alpha);
    if traces.b2.len_of(Axis(2)) != fa.grid.ny {
        return Err(EdgeError::GridMismatch("trace and data grids differ".into()));
    }
    let jets = EdgeJets::from_grid(&fa, &traces.b2, 2 * n)?;
    expand_jets(&jets, cfg.alpha, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::zeta1;

    const LAM: [f64; 2] = [0.3, -0.2];

    /// Jets of `f = e^{-Y1-Y2}` and `b2 = Y1 e^{-Y1}` with unit x-profile.
    fn exponential_jets(order: usize) -> EdgeJets {
        let one = |v: f64| Array2::from_elem((2, 2), Complex64::from(v));
        let sgn = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
        EdgeJets {
            lambda: LAM.to_vec(),
            f: (0..=order)
                .map(|a| (0..=order - a).map(|b| one(sgn(a + b))).collect())
                .collect(),
            b: (0..=order).map(|k| one(-sgn(k) * k as f64)).collect(),
        }
    }

    fn exact(eta1: f64, eta2: f64, alpha: f64) -> Complex64 {
        let (l1, l2) = (LAM[0], LAM[1]);
        let z = zeta1(l1, l2, eta1);
        let odd = -2.0 * I * eta1 / (1.0 + eta1 * eta1);
        let f_hat = |w: Complex64| odd / (1.0 + I * w);
        let s = eta2 - alpha * eta1.abs();
        let sigma = l1 * l1 + l2 * l2 + s * s + eta1 * eta1;
        let root = Complex64::new(alpha * eta1.abs(), -z);
        let green = 2.0 / sigma * f_hat(eta2.into());
        let refl = -2.0 / sigma * (l2 + I * (alpha * eta1.abs() - eta2)) / (l2 - z) * f_hat(root);
        let b_hat = -2.0 * I * 2.0 * eta1 / (1.0 + eta1 * eta1).powi(2);
        let coup = -I * alpha * b_hat / ((eta2 - root.conj()) * (l2 - z));
        green + refl + coup
    }

    fn shell_error(e: &Expansion, r: f64, alpha: f64) -> f64 {
        [0.6, 2.3, -0.9, -2.4]
            .iter()
            .map(|t: &f64| {
                let (e1, e2) = (r * t.cos(), r * t.sin());
                (exact(e1, e2, alpha) - e.eval(0, 1, e1, e2)).norm()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn remainder_decays_at_the_stated_rate() {
        for alpha in [0.0, 1.0] {
            for n in 0..=2 {
                let e = expand_jets(&exponential_jets(2 * n), alpha, n).unwrap();
                let (e1, e2) = (shell_error(&e, 40.0, alpha), shell_error(&e, 80.0, alpha));
                let rate = (e1 / e2).log2();
                assert!(rate >= (e.degree_limit + 1) as f64 - 0.3, "α={alpha} n={n}: rate {rate}");
                // and the leading terms carry real content
                assert!(shell_error(&Expansion { terms: vec![], ..e.clone() }, 40.0, alpha) > 10.0 * e1);
            }
        }
    }

    #[test]
    fn exponent_tags_are_consistent() {
        let e = expand_jets(&exponential_jets(2), 1.0, 1).unwrap();
        assert!(!e.terms.is_empty());
        for t in &e.terms {
            assert!(t.k == 0 || t.k == 1);
            assert!(t.degree() <= e.degree_limit);
            assert!(t.j >= -1);
        }
        assert!(e.terms.iter().any(|t| t.source == TermSource::Coupling));
        // α = 0 has no coupling contribution
        let e0 = expand_jets(&exponential_jets(2), 0.0, 1).unwrap();
        assert!(e0
            .terms
            .iter()
            .filter(|t| t.source == TermSource::Coupling)
            .all(|t| t.max_coefficient() == 0.0));
    }

    #[test]
    fn data_flat_at_the_faces_has_nothing_to_expand() {
        let mut jets = exponential_jets(2);
        for row in &mut jets.f {
            for c in row {
                c.fill(Complex64::default());
            }
        }
        for c in &mut jets.b {
            c.fill(Complex64::default());
        }
        let e = expand_jets(&jets, 1.0, 1).unwrap();
        assert!(e.terms.iter().all(|t| t.max_coefficient() <= crate::geometry::DECAY_TOL));
    }

    #[test]
    fn order_beyond_the_jets_is_rejected() {
        assert!(matches!(
            expand_jets(&exponential_jets(2), 1.0, 2),
            Err(EdgeError::ExpansionOrder { .. })
        ));
    }
}
