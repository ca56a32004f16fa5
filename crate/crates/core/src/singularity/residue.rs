//! Closed-form inverse transform in `η2` of `((η2 - α|η1|)² + η1²)^{-(j+1)}`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::cosine_integral;
use crate::{EdgeError, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `∫ e^{iη2 Y2} ((η2 - α|η1|)² + η1²)^{-(j+1)} dη2` for `Y2 > 0`, by the
/// residue at `η2 = α|η1| + i|η1|`.
pub fn residue_inverse(j: u32, eta1: f64, alpha: f64, y2: f64) -> Result<Complex64> {
    if eta1 == 0.0 {
        return Err(EdgeError::InvalidArgument("residue formula needs η1 != 0".into()));
    }
    if y2 <= 0.0 || !y2.is_finite() {
        return Err(EdgeError::InvalidArgument("residue formula needs Y2 > 0".into()));
    }
    let a = eta1.abs();
    let jf = factorial(j);
    let mut sum = Complex64::default();
    for k in 0..=j {
        let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
        let num = binomial(j, k) * sign * factorial(2 * j - k) / jf;
        sum += num * (I * y2).powu(k) / (2.0 * I * a).powu(2 * j - k + 1);
    }
    let phase = (a * Complex64::new(-1.0, alpha) * y2).exp();
    Ok(2.0 * PI * I / jf * sum * phase)
}

/// The same integral by quadrature: shifting `η2 = α|η1| + t` leaves
/// `2 e^{iα|η1|Y2} ∫_0^∞ cos(tY2) / (t² + η1²)^{j+1} dt`.
pub fn residue_quadrature(j: u32, eta1: f64, alpha: f64, y2: f64, tol: f64) -> Complex64 {
    let b2 = eta1 * eta1;
    let g = move |t: f64| Complex64::from((t * t + b2).powi(-(j as i32 + 1)));
    let phase = (I * alpha * eta1.abs() * y2).exp();
    2.0 * phase * cosine_integral(g, y2, tol)
}

/// One row of the residue table.
#[derive(Clone, Copy, Debug)]
pub struct ResidueRow {
    pub j: u32,
    pub eta1: f64,
    pub alpha: f64,
    pub y2: f64,
    pub closed: Complex64,
    pub quadrature: Complex64,
}

impl ResidueRow {
    pub fn relative_error(&self) -> f64 {
        (self.closed - self.quadrature).norm() / self.quadrature.norm().max(f64::MIN_POSITIVE)
    }
}

pub fn residue_table(
    js: &[u32],
    eta1s: &[f64],
    alpha: f64,
    y2s: &[f64],
    tol: f64,
) -> Result<Vec<ResidueRow>> {
    let mut rows = Vec::new();
    for &j in js {
        for &eta1 in eta1s {
            for &y2 in y2s {
                rows.push(ResidueRow {
                    j,
                    eta1,
                    alpha,
                    y2,
                    closed: residue_inverse(j, eta1, alpha, y2)?,
                    quadrature: residue_quadrature(j, eta1, alpha, y2, tol),
                });
            }
        }
    }
    Ok(rows)
}
