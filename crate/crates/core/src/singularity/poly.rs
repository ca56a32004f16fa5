//! Complex polynomials in `(Y1, Y2)`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// `Σ c[(i, j)] Y1^i Y2^j`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: Complex64, i: u32, j: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(c, i, j);
        p
    }

    pub fn y1() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 1, 0)
    }

    pub fn y2() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), 0, 1)
    }

    pub fn add_term(&mut self, c: Complex64, i: u32, j: u32) {
        let e = self.terms.entry((i, j)).or_default();
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Complex64 {
        self.terms.get(&(i, j)).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    /// True when every term with `|c| > tol` has total degree `d`.
    pub fn is_homogeneous(&self, d: u32, tol: f64) -> bool {
        self.terms.iter().all(|((i, j), c)| i + j == d || c.norm() <= tol)
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Complex64 {
        self.eval_complex(y1.into(), y2.into())
    }

    pub fn eval_complex(&self, y1: Complex64, y2: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((i, j), c)| c * y1.powu(*i) * y2.powu(*j))
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            out.add_term(c * s, i, j);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::constant(Complex64::new(1.0, 0.0)), |acc, _| &acc * self)
    }

    pub fn d_y1(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if i > 0 {
                out.add_term(c * i as f64, i - 1, j);
            }
        }
        out
    }

    pub fn d_y2(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if j > 0 {
                out.add_term(c * j as f64, i, j - 1);
            }
        }
        out
    }

    /// `∫_0^{Y1} p dY1`.
    pub fn int_y1(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            out.add_term(c / (i + 1) as f64, i + 1, j);
        }
        out
    }

    /// `∫_0^{Y2} p dY2`.
    pub fn int_y2(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            out.add_term(c / (j + 1) as f64, i, j + 1);
        }
        out
    }

    /// `p(Y1, 0)` as a polynomial in `Y1`.
    pub fn at_y2_zero(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if j == 0 {
                out.add_term(c, i, 0);
            }
        }
        out
    }

    /// `p(0, Y2)`.
    pub fn at_y1_zero(&self) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if i == 0 {
                out.add_term(c, 0, j);
            }
        }
        out
    }

    /// Quotient and remainder of division by `Y1² + k Y2²`, eliminating the
    /// highest powers of `Y1`. The remainder has degree at most 1 in `Y1`.
    pub fn div_rem_quadratic(&self, k: Complex64) -> (Self, Self) {
        let mut rem = self.clone();
        let mut quot = Self::zero();
        loop {
            let top = rem.terms.keys().filter(|(i, _)| *i >= 2).max_by_key(|(i, _)| *i).copied();
            let Some((i, j)) = top else { break };
            let c = rem.coeff(i, j);
            quot.add_term(c, i - 2, j);
            rem.add_term(-c, i, j);
            rem.add_term(-c * k, i - 2, j + 2);
        }
        (quot, rem)
    }

    /// Drops coefficients with `|c| <= tol`.
    pub fn chop(&self, tol: f64) -> Self {
        let mut out = Self::zero();
        for ((i, j), c) in self.terms() {
            if c.norm() > tol {
                out.add_term(c, i, j);
            }
        }
        out
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for ((i, j), c) in rhs.terms() {
            out.add_term(c, i, j);
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self + &(-rhs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), a) in self.terms() {
            for ((k, l), b) in rhs.terms() {
                out.add_term(a * b, i + k, j + l);
            }
        }
        out
    }
}
