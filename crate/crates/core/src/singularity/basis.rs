//! Closed-form singular functions `p1 L + p2 + p3 A + p4 log|Y1|` with
//! `L = log(Y1² + c²Y2²)`, `A = arctan(Y1 / (c Y2))` and `c = 1 - iα`.
//!
//! `Φ_l = k_l Q^{l-1} L` with `k_1 = -1/(4π)`. The recursion for `k_l` is
//! fixed by requiring `∂Φ_l/∂Y2 = c²/(2(l-1)) Y2 Φ_{l-1}` modulo polynomials.
//! Repeated antiderivatives in `Y1` start at `Y1 = 0` up to a polynomial
//! normalized so that `p2(0, Y2) = 0`; antiderivatives in `Y2` are exact
//! integrals from `Y2 = 0` for `Y1 > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::poly::Poly2;
use crate::{EdgeError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Tolerance for the exact-division remainders during construction.
const DIVISION_TOL: f64 = 1e-9;

/// `arctan(w) = (1/(2i)) log((1 + iw) / (1 - iw))`, principal logarithm.
pub fn arctan(w: Complex64) -> Complex64 {
    ((ONE + I * w) / (ONE - I * w)).ln() / (2.0 * I)
}

pub fn edge_c(alpha: f64) -> Complex64 {
    Complex64::new(1.0, -alpha)
}

/// `Q = Y1² + c² Y2²`.
pub fn quadratic(alpha: f64) -> Poly2 {
    let c = edge_c(alpha);
    &Poly2::y1().pow(2) + &Poly2::monomial(c * c, 0, 2)
}

/// `log(Y1² + c²Y2²)`.
pub fn log_q(alpha: f64, y1: f64, y2: f64) -> Complex64 {
    let c = edge_c(alpha);
    (Complex64::from(y1 * y1) + c * c * y2 * y2).ln()
}

/// `arctan(Y1 / (c Y2))`, continued to `Y2 = 0+`.
pub fn arctan_q(alpha: f64, y1: f64, y2: f64) -> Complex64 {
    if y2 == 0.0 {
        return if y1 == 0.0 {
            Complex64::new(f64::NAN, 0.0)
        } else {
            Complex64::new(0.5 * PI * y1.signum(), 0.0)
        };
    }
    arctan(Complex64::from(y1) / (edge_c(alpha) * y2))
}

/// `p1 L + p2 + p3 A + p4 log|Y1|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogArcForm {
    pub alpha: f64,
    pub p1: Poly2,
    pub p2: Poly2,
    pub p3: Poly2,
    pub p4: Poly2,
}

impl LogArcForm {
    pub fn log_only(alpha: f64, p1: Poly2) -> Self {
        Self {
            alpha,
            p1,
            p2: Poly2::zero(),
            p3: Poly2::zero(),
            p4: Poly2::zero(),
        }
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Complex64 {
        self.eval_singular(y1, y2) + self.p2.eval(y1, y2)
    }

    /// Value without the polynomial part `p2`.
    pub fn eval_singular(&self, y1: f64, y2: f64) -> Complex64 {
        let mut v = Complex64::default();
        if !self.p1.is_zero() {
            v += self.p1.eval(y1, y2) * log_q(self.alpha, y1, y2);
        }
        if !self.p3.is_zero() {
            v += self.p3.eval(y1, y2) * arctan_q(self.alpha, y1, y2);
        }
        if !self.p4.is_zero() {
            v += self.p4.eval(y1, y2) * y1.abs().ln();
        }
        v
    }

    /// Largest coefficient difference over all four polynomials.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        [
            (&self.p1 - &other.p1).max_coeff(),
            (&self.p2 - &other.p2).max_coeff(),
            (&self.p3 - &other.p3).max_coeff(),
            (&self.p4 - &other.p4).max_coeff(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `∂/∂Y1`; `None` when the result leaves the family (a `log|Y1|` term
    /// or a non-polynomial rational part).
    pub fn d_y1(&self) -> Option<Self> {
        if !self.p4.is_zero() {
            return None;
        }
        let c = edge_c(self.alpha);
        let r = &(&Poly2::y1() * &self.p1).scale(2.0.into()) + &(&Poly2::y2() * &self.p3).scale(c);
        let (quot, rem) = r.div_rem_quadratic(c * c);
        if rem.max_coeff() > DIVISION_TOL * r.max_coeff().max(1.0) {
            return None;
        }
        Some(Self {
            alpha: self.alpha,
            p1: self.p1.d_y1(),
            p2: &self.p2.d_y1() + &quot,
            p3: self.p3.d_y1(),
            p4: Poly2::zero(),
        })
    }

    /// `∂/∂Y2`; `None` when the rational part is not a polynomial.
    pub fn d_y2(&self) -> Option<Self> {
        let c = edge_c(self.alpha);
        let r = &(&Poly2::y2() * &self.p1).scale(2.0 * c * c) - &(&Poly2::y1() * &self.p3).scale(c);
        let (quot, rem) = r.div_rem_quadratic(c * c);
        if rem.max_coeff() > DIVISION_TOL * r.max_coeff().max(1.0) {
            return None;
        }
        Some(Self {
            alpha: self.alpha,
            p1: self.p1.d_y2(),
            p2: &self.p2.d_y2() + &quot,
            p3: self.p3.d_y2(),
            p4: self.p4.d_y2(),
        })
    }

    /// Antiderivative in `Y1` whose `p1`, `p3` are homogeneous of degree
    /// `degree` and whose `p2` vanishes on `Y1 = 0`.
    pub fn int_y1(&self, degree: u32) -> Result<Self> {
        if !self.p4.is_zero() {
            return Err(EdgeError::InvalidArgument(
                "Y1 antiderivative of a log|Y1| term is outside the family".into(),
            ));
        }
        let c = edge_c(self.alpha);
        let a1 = self.p1.int_y1();
        let a3 = self.p3.int_y1();
        let at = |p: &Poly2, s: f64| p.eval_complex(s * I * c, ONE);
        let (pp, pm, qp, qm) = (at(&a1, 1.0), at(&a1, -1.0), at(&a3, 1.0), at(&a3, -1.0));
        // 2Y1 p1 + c Y2 p3 must vanish at Y1 = ±icY2
        let g = (-2.0 * I * (pp + pm) - qp + qm) / (4.0 * I);
        let h = -2.0 * I * pp - qp - 2.0 * I * g;
        let p1 = &a1 + &Poly2::monomial(g, 0, degree);
        let p3 = &a3 + &Poly2::monomial(h, 0, degree);
        let r = &(&Poly2::y1() * &p1).scale(2.0.into()) + &(&Poly2::y2() * &p3).scale(c);
        let (quot, rem) = r.div_rem_quadratic(c * c);
        check_remainder(&rem, &r)?;
        Ok(Self {
            alpha: self.alpha,
            p1,
            p2: (&self.p2 - &quot).int_y1(),
            p3,
            p4: Poly2::zero(),
        })
    }

    /// `∫_0^{Y2} F(Y1, t) dt` for `Y1 > 0`; `degree` is the homogeneity
    /// degree of the result's polynomials.
    pub fn int_y2(&self, degree: u32) -> Result<Self> {
        let c = edge_c(self.alpha);
        let a1 = self.p1.int_y2();
        let a3 = self.p3.int_y2();
        let at = |p: &Poly2, s: f64| p.eval_complex(s * I * c, ONE);
        let (pp, pm, qp, qm) = (at(&a1, 1.0), at(&a1, -1.0), at(&a3, 1.0), at(&a3, -1.0));
        let sp = (I * c).powu(degree);
        let sm = (-I * c).powu(degree);
        // 2(P + g s) ∓ i(Qa + h s) = 0 at Y1 = ±icY2
        let (m11, m12, r1) = (2.0 * sp, -I * sp, -2.0 * pp + I * qp);
        let (m21, m22, r2) = (2.0 * sm, I * sm, -2.0 * pm - I * qm);
        let det = m11 * m22 - m12 * m21;
        let g = (r1 * m22 - m12 * r2) / det;
        let h = (m11 * r2 - r1 * m21) / det;
        let p1 = &a1 + &Poly2::monomial(g, degree, 0);
        let p3 = &a3 + &Poly2::monomial(h, degree, 0);
        let r = &(&Poly2::y2() * &p1).scale(2.0 * c * c) - &(&Poly2::y1() * &p3).scale(c);
        let (quot, rem) = r.div_rem_quadratic(c * c);
        check_remainder(&rem, &r)?;
        // cancel the Y2 = 0+ value: L -> 2 log|Y1| and A -> π/2
        let p2 = &(&self.p2 - &quot).int_y2() + &Poly2::monomial(-0.5 * PI * h, degree, 0);
        let p4 = &self.p4.int_y2() + &Poly2::monomial(-2.0 * g, degree, 0);
        Ok(Self {
            alpha: self.alpha,
            p1,
            p2,
            p3,
            p4,
        })
    }
}

fn check_remainder(rem: &Poly2, r: &Poly2) -> Result<()> {
    if rem.max_coeff() > DIVISION_TOL * r.max_coeff().max(1.0) {
        return Err(EdgeError::InvalidArgument(format!(
            "singular basis construction left a remainder of size {:.3e}",
            rem.max_coeff()
        )));
    }
    Ok(())
}

/// `k_l` with `k_1 = -1/(4π)` and `k_l = k_{l-1} / (4(l-1)²)`.
pub fn phi_constant(l: u32) -> f64 {
    (2..=l).fold(-0.25 / PI, |k, m| k / (4.0 * ((m - 1) * (m - 1)) as f64))
}

/// One member `(Φ_l)_{jk}` of the singular basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularBasis {
    pub l: u32,
    pub j: u32,
    pub k: u32,
    pub form: LogArcForm,
}

impl SingularBasis {
    /// Homogeneity degree of every coefficient polynomial.
    pub fn degree(&self) -> u32 {
        2 * self.l - 2 + self.j + self.k
    }

    pub fn eval(&self, y1: f64, y2: f64) -> Complex64 {
        self.form.eval(y1, y2)
    }
}

/// `(Φ_l)_{jk}`: `j` antiderivatives in `Y1` followed by `k` in `Y2`.
pub fn phi_basis(l: u32, j: u32, k: u32, alpha: f64) -> Result<SingularBasis> {
    if l == 0 {
        return Err(EdgeError::InvalidArgument("Φ_l needs l >= 1".into()));
    }
    let p1 = quadratic(alpha).pow(l - 1).scale(phi_constant(l).into());
    let mut form = LogArcForm::log_only(alpha, p1);
    let mut degree = 2 * l - 2;
    for _ in 0..j {
        degree += 1;
        form = form.int_y1(degree)?;
    }
    for _ in 0..k {
        degree += 1;
        form = form.int_y2(degree)?;
    }
    Ok(SingularBasis { l, j, k, form })
}

/// Maximum relative deviation, on a lattice in `Y1 > 0`, `Y2 >= 0`, between
/// the singular parts of `∂Φ_l/∂Y2` and `c²/(2(l-1)) Y2 Φ_{l-1}`.
pub fn phi_y2_derivative_check(l: u32, alpha: f64) -> Result<f64> {
    if l < 2 {
        return Err(EdgeError::InvalidArgument("the Y2 identity needs l >= 2".into()));
    }
    let c = edge_c(alpha);
    let lhs = phi_basis(l, 0, 0, alpha)?
        .form
        .d_y2()
        .ok_or_else(|| EdgeError::InvalidArgument("∂Φ_l/∂Y2 left the family".into()))?;
    let lower = phi_basis(l - 1, 0, 0, alpha)?.form;
    let factor = Poly2::monomial(c * c / (2.0 * (l - 1) as f64), 0, 1);
    let rhs = LogArcForm {
        alpha,
        p1: &factor * &lower.p1,
        p2: &factor * &lower.p2,
        p3: &factor * &lower.p3,
        p4: &factor * &lower.p4,
    };
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for a in 1..=8 {
        for b in 0..=8 {
            let (y1, y2) = (0.15 * a as f64, 0.15 * b as f64);
            let r = rhs.eval_singular(y1, y2);
            diff = diff.max((lhs.eval_singular(y1, y2) - r).norm());
            scale = scale.max(r.norm());
        }
    }
    Ok(diff / scale)
}
