//! Smooth compactly supported cutoffs.
//!
//! Every cutoff in the crate is built from the same C^∞ step, so results that
//! depend on "a fixed smooth bump" are reproducible.

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C^∞ step: 0 for `t <= 0`, 1 for `t >= 1`, monotone in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = psi(t);
    a / (a + psi(1.0 - t))
}

/// Even plateau function: 1 for `|r| <= inner`, 0 for `|r| >= outer`.
pub fn plateau(r: f64, inner: f64, outer: f64) -> f64 {
    debug_assert!(outer > inner && inner >= 0.0);
    let r = r.abs();
    smooth_step((outer - r) / (outer - inner))
}

/// Unit bump on the half line used by the Borel construction: 1 on `[0, w/2]`,
/// 0 beyond `w`.
pub fn half_bump(y: f64, width: f64) -> f64 {
    plateau(y, 0.5 * width, width)
}
