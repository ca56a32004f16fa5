//! Adaptive Gauss-Kronrod quadrature for complex integrands, used as an
//! independent oracle for closed-form transforms.

use num_complex::Complex64;

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let s = f(c - h * x) + f(c + h * x);
        kron += s * w;
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Globally adaptive bisection until the summed error estimate is below
/// `max(abs_tol, rel_tol |I|)` or `max_intervals` is reached.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total: Complex64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) || parts.len() >= max_intervals {
            return QuadResult {
                value: total,
                error: err,
                evaluations,
            };
        }
        let worst = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        evaluations += 30;
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Wynn epsilon extrapolation of a sequence of partial sums. Deep columns
/// amplify roundoff, so the estimate returned is the even-column entry that
/// moved least from the previous even column.
pub fn wynn_epsilon(partial: &[Complex64]) -> Complex64 {
    let n = partial.len();
    let last = partial.last().copied().unwrap_or_default();
    if n < 3 {
        return last;
    }
    let mut prev = vec![Complex64::default(); n + 1];
    let mut cur: Vec<Complex64> = partial.to_vec();
    let mut best = last;
    let mut best_change = (partial[n - 1] - partial[n - 2]).norm();
    let mut last_even = last;
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d.norm() <= 1e-15 * cur[i + 1].norm() {
                // the column has converged to roundoff
                return if k % 2 == 0 { cur[i + 1] } else { best };
            }
            next.push(prev[i + 1] + d.inv());
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            let Some(&e) = cur.last() else { break };
            if !e.is_finite() {
                break;
            }
            let change = (e - last_even).norm();
            if change < best_change {
                best = e;
                best_change = change;
            }
            last_even = e;
        }
    }
    best
}

/// `∫_0^∞ g(t) cos(ω t) dt` for slowly decaying smooth `g`, summed over
/// half periods of the cosine and accelerated with [`wynn_epsilon`].
pub fn cosine_integral(g: impl Fn(f64) -> Complex64, omega: f64, tol: f64) -> Complex64 {
    assert!(omega > 0.0, "frequency must be positive");
    let half = std::f64::consts::PI / omega;
    let f = |t: f64| g(t) * (omega * t).cos();
    // first piece ends at the first zero of cos
    let mut edges = vec![0.0, 0.5 * half];
    for k in 1..=60 {
        edges.push((k as f64 + 0.5) * half);
    }
    let mut sum = Complex64::default();
    let mut partial = Vec::with_capacity(edges.len());
    for w in edges.windows(2) {
        sum += integrate(f, w[0], w[1], tol * 1e-3, tol * 1e-3, 200).value;
        partial.push(sum);
    }
    wynn_epsilon(&partial)
}
