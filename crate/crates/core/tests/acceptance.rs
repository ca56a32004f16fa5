//! Acceptance suite. Each test checks one criterion at its stated tolerance
//! and prints a single `PASS`/`FAIL` line before asserting.
//!
//! Heavy solves share a lock so that at most one 64⁴ field set is alive.

use std::f64::consts::PI;
use std::sync::Mutex;

use ndarray::Array4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dbar_edge::cli::{EDGE_DELTA_FRAC, INTERIOR_MARGIN_FRAC};
use dbar_edge::geometry::{EdgeConfig, FormData, PhysicalField};
use dbar_edge::singularity::{
    edge_gradient, edge_slice, fit_samples, fit_singularities, phi_basis, phi_constant,
    phi_y2_derivative_check, quadratic, residue_table, singular_function, subtract_singular,
    FitWindow,
};
use dbar_edge::solver::{solve, solve_with_traces, Solution};
use dbar_edge::spectral::{
    eta1_root, eta2_root, extend_field, forward_transform, inverse_transform, laplace_symbol,
    reflected_symbol, Extension, FrequencyGrid,
};
use dbar_edge::verify::{
    alpha_zero_oracle, boundary_residuals, edge_consistency, interior_residual, lp_norms,
};

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} [{tag}] {name}: {detail}");
}

fn cfg(alpha: f64, nx: usize, ny: usize) -> EdgeConfig {
    EdgeConfig::default().with_alpha(alpha).with_grid(nx, ny)
}

fn rel_l2(a: &PhysicalField, b: &PhysicalField) -> f64 {
    let d: f64 = a.data.iter().zip(b.data.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
    let s: f64 = b.data.iter().map(|y| y.norm_sqr()).sum();
    (d / s).sqrt()
}

#[test]
fn c01_transform_round_trip() {
    let grid = cfg(0.0, 32, 32).grid();
    let fg = FrequencyGrid::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_round = 0.0f64;
    for _ in 0..3 {
        // a few random complex Gaussian bumps on the reflected window
        let bumps: Vec<([f64; 4], f64, Complex64)> = (0..4)
            .map(|_| {
                let c = [0; 4].map(|_| rng.gen_range(-2.0..2.0));
                (c, rng.gen_range(0.5..2.0), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let (nx, ny) = (grid.nx, 2 * grid.ny);
        let g = Array4::from_shape_fn((nx, nx, ny, ny), |(a, b, c, d)| {
            let p = [grid.x(a), grid.x(b), (c as f64 - grid.ny as f64) * grid.hy(), (d as f64 - grid.ny as f64) * grid.hy()];
            bumps
                .iter()
                .map(|(ctr, w, amp)| {
                    let r2: f64 = p.iter().zip(ctr).map(|(x, c)| (x - c).powi(2)).sum();
                    amp * (-w * r2).exp()
                })
                .sum::<Complex64>()
        });
        let back = inverse_transform(&forward_transform(&g, &fg).unwrap()).unwrap();
        let scale = g.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let err = g.iter().zip(back.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        worst_round = worst_round.max(err / scale);
    }

    let f = FormData::gaussian(grid).f1;
    let t = forward_transform(&extend_field(&f, Extension::Even, Extension::Even), &fg).unwrap();
    let mut worst_gauss = 0.0f64;
    for ((a, b, c, d), v) in t.data.indexed_iter() {
        let w2 = fg.lambda[a].powi(2) + fg.lambda[b].powi(2) + fg.eta[c].powi(2) + fg.eta[d].powi(2);
        worst_gauss = worst_gauss.max((v - PI * PI * (-w2 / 4.0).exp()).norm());
    }
    let pass = worst_round <= 1e-10 && worst_gauss <= 1e-6;
    verdict(1, "transform round trip", pass, &format!("round trip {worst_round:.2e}, gaussian {worst_gauss:.2e}"));
    assert!(pass);
}

#[test]
fn c02_symbol_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let c = |x: f64| Complex64::new(x, 0.0);
    let (mut square, mut root2, mut root1) = (0.0f64, 0.0f64, 0.0f64);
    for &alpha in &[0.0, 0.5, 1.0, 3.0] {
        for _ in 0..10_000 {
            let [l1, l2, e1, e2] = [0; 4].map(|_| rng.gen_range(-40.0..40.0));
            let scale = 1.0 + l1 * l1 + l2 * l2 + e1 * e1 + e2 * e2;
            // the completed square of the symbol with η1 ≥ 0
            let full = laplace_symbol(c(l1), c(l2), c(e1.abs()), c(e2), alpha).re;
            // round-off is relative to the largest term, which carries (1 + α)²
            let terms = scale * (1.0 + alpha) * (1.0 + alpha);
            square = square.max((full - reflected_symbol(l1, l2, e1, e2, alpha)).abs() / terms);
            let r2 = eta2_root(l1, l2, e1, alpha);
            root2 = root2.max(laplace_symbol(c(l1), c(l2), c(e1.abs()), r2, alpha).norm() / scale);
            let r1 = eta1_root(l1, l2, e2, alpha);
            root1 = root1.max(laplace_symbol(c(l1), c(l2), r1, c(e2.abs()), alpha).norm() / scale);
        }
    }
    let pass = square <= 4.0 * f64::EPSILON && root2 <= 1e-12 && root1 <= 1e-12;
    verdict(
        2,
        "symbol and roots",
        pass,
        &format!("square {square:.2e}, eta2 root {root2:.2e}, eta1 root {root1:.2e} (scaled)"),
    );
    assert!(pass);
}

#[test]
fn c03_residue_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let eta1 = sign * rng.gen_range(0.2..3.0);
        let alpha = rng.gen_range(0.0..3.0);
        let y2 = rng.gen_range(0.2..3.0);
        for row in residue_table(&[0, 1, 2, 3], &[eta1], alpha, &[y2], 1e-12).unwrap() {
            worst = worst.max(row.relative_error());
        }
    }
    let pass = worst <= 1e-6;
    verdict(3, "residue formula", pass, &format!("max relative error {worst:.2e}"));
    assert!(pass);
}

#[test]
fn c04_alpha_zero_oracle() {
    let _g = heavy();
    let c = cfg(0.0, 32, 32);
    let f = FormData::gaussian(c.grid());
    let sol = solve(&f, &c).unwrap();
    let (o1, o2) = alpha_zero_oracle(&f, &c).unwrap();
    let (d1, d2) = (rel_l2(&sol.u1, &o1), rel_l2(&sol.u2, &o2));
    let pass = d1 <= 1e-5 && d2 <= 1e-5;
    verdict(4, "alpha = 0 oracle", pass, &format!("relative L2 u1 {d1:.2e}, u2 {d2:.2e}"));
    assert!(pass);
}

struct ResidualRun {
    interior: [f64; 2],
    h: f64,
    dirichlet: f64,
    derivative: [f64; 2],
}

fn residual_run(alpha: f64, n: usize) -> ResidualRun {
    let c = cfg(alpha, n, n);
    let f = FormData::gaussian(c.grid());
    let sol = solve(&f, &c).unwrap();
    let ly = c.ly;
    let [ra, r2] = interior_residual(&sol.u_alpha, &sol.u2, &f, alpha, INTERIOR_MARGIN_FRAC * ly).unwrap();
    let faces = boundary_residuals(&sol.u_alpha, &sol.u2, alpha, EDGE_DELTA_FRAC * ly).unwrap();
    let get = |name: &str| faces.iter().find(|r| r.name == name).unwrap().sup;
    let scale = sol.u_alpha.max_abs().max(sol.u2.max_abs());
    ResidualRun {
        interior: [ra.sup, r2.sup],
        h: ra.h,
        dirichlet: get("dir1").max(get("dir2")) / scale,
        derivative: [get("der_y1"), get("der_y2")],
    }
}

#[test]
fn c05_pde_and_boundary_residuals() {
    let _g = heavy();
    let mut pass = true;
    let mut detail = Vec::new();
    for alpha in [0.0, 1.0] {
        let coarse = residual_run(alpha, 32);
        let fine = residual_run(alpha, 64);
        let ratio = (coarse.h / fine.h).ln();
        for (k, name) in ["u_alpha", "u2"].iter().enumerate() {
            let (a, b) = (coarse.interior[k], fine.interior[k]);
            // a residual that is zero to round-off on both grids has nothing to converge
            let order = if a.max(b) < 1e-13 { f64::INFINITY } else { (a / b).ln() / ratio };
            pass &= order >= 1.8;
            detail.push(format!("a={alpha} {name} {a:.2e}->{b:.2e} order {order:.2}"));
        }
        let dir = coarse.dirichlet.max(fine.dirichlet);
        pass &= dir <= 1e-6;
        detail.push(format!("a={alpha} dirichlet {dir:.1e}"));
        for (k, name) in ["der_y1", "der_y2"].iter().enumerate() {
            let (a, b) = (coarse.derivative[k], fine.derivative[k]);
            pass &= b < a;
            detail.push(format!("a={alpha} {name} {a:.2e}->{b:.2e}"));
        }
    }
    verdict(5, "PDE and boundary residuals", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn c06_edge_conditions() {
    let _g = heavy();
    let alpha = 1.0;
    let mut constants = Vec::new();
    let mut detail = Vec::new();
    for ny in [16, 32, 64] {
        let c = cfg(alpha, 32, ny);
        let sol = solve(&FormData::gaussian(c.grid()), &c).unwrap();
        let e = edge_consistency(&sol.u_alpha, &sol.u2).unwrap();
        let worst = e.d_u2.max(e.d_u_alpha).max(e.mismatch);
        constants.push(worst / e.h);
        detail.push(format!(
            "h={:.3} d_u2 {:.2e} d_ua {:.2e} mismatch {:.2e}",
            e.h, e.d_u2, e.d_u_alpha, e.mismatch
        ));
    }
    let (lo, hi) = constants.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &c| (l.min(c), h.max(c)));
    // O(Δ) keeps the implied constant within a factor 2; an O(1) edge value doubles it per refinement
    let pass = hi <= 2.0 * lo;
    detail.push(format!("C = {constants:.2?}"));
    verdict(6, "edge conditions", pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn c07_phi_basis_identities() {
    let mut worst_norm = 0.0f64;
    let mut degrees_ok = true;
    for l in 1..=4u32 {
        let k = phi_constant(l);
        if l == 1 {
            worst_norm = worst_norm.max((k + 0.25 / PI).abs());
        } else {
            let prev = phi_constant(l - 1);
            worst_norm = worst_norm.max((k * 4.0 * f64::from((l - 1) * (l - 1)) - prev).abs() / prev.abs());
        }
    }
    let (mut worst_y1, mut worst_y2) = (0.0f64, 0.0f64);
    for alpha in [0.0, 0.5, 1.0, 3.0] {
        for l in 1..=3u32 {
            // coefficient table of Φ_l itself: k_l Q^{l-1} times the logarithm
            let top = phi_basis(l, 0, 0, alpha).unwrap();
            let expect = quadratic(alpha).pow(l - 1).scale(phi_constant(l).into());
            worst_norm = worst_norm.max((&top.form.p1 - &expect).max_coeff());
            for j in 0..=3u32 {
                for k in 0..=1u32 {
                    let b = phi_basis(l, j, k, alpha).unwrap();
                    let d = b.degree();
                    degrees_ok &= d == 2 * l - 2 + j + k;
                    for p in [&b.form.p1, &b.form.p2, &b.form.p3, &b.form.p4] {
                        degrees_ok &= p.is_homogeneous(d, 1e-12);
                    }
                }
                if j >= 1 {
                    let hi = phi_basis(l, j, 0, alpha).unwrap().form.d_y1().unwrap();
                    let lo = phi_basis(l, j - 1, 0, alpha).unwrap().form;
                    worst_y1 = worst_y1.max(hi.max_coeff_diff(&lo));
                }
            }
            if l >= 2 {
                worst_y2 = worst_y2.max(phi_y2_derivative_check(l, alpha).unwrap());
            }
        }
    }
    let pass = degrees_ok && worst_norm <= 1e-15 && worst_y1 <= 1e-8 && worst_y2 <= 1e-8;
    verdict(
        7,
        "Phi basis identities",
        pass,
        &format!("degrees {degrees_ok}, normalization {worst_norm:.1e}, dY1 {worst_y1:.1e}, dY2 {worst_y2:.1e}"),
    );
    assert!(pass);
}

fn synthetic_recovery() -> f64 {
    let mut worst = 0.0f64;
    for (alpha, degree) in [(0.0, 1), (1.0, 0)] {
        let window = FitWindow {
            degree,
            ..FitWindow::default()
        };
        let coeffs = [
            Complex64::new(0.7, -0.2),
            Complex64::new(-0.4, 0.1),
            Complex64::new(0.3, 0.5),
            Complex64::new(-0.25, 0.0),
        ];
        let h = 0.05;
        let mut samples = Vec::new();
        for i in 0..=16 {
            for j in 0..=16 {
                let (y1, y2) = (i as f64 * h, j as f64 * h);
                let mut u = Complex64::new(0.2 + y1 - 0.5 * y2 * y2, 0.1 * y1 * y2);
                for (kind, a) in coeffs.iter().enumerate() {
                    if alpha == 0.0 && kind % 2 == 1 {
                        continue;
                    }
                    let s = singular_function(kind, alpha, y1, y2);
                    if s.is_finite() {
                        u += a * s;
                    }
                }
                samples.push((y1, y2, u));
            }
        }
        let fit = fit_samples(&samples, alpha, &window).unwrap();
        for (kind, a) in coeffs.iter().enumerate() {
            if fit.active[kind] {
                worst = worst.max((fit.leading(kind) - a).norm());
            }
        }
    }
    worst
}

#[test]
fn c08_singularity_fit() {
    let _g = heavy();
    let recovery = synthetic_recovery();
    let alpha = 1.0;
    let mut raw = Vec::new();
    let mut rem = Vec::new();
    let mut nontrivial = false;
    let mut detail = vec![format!("synthetic error {recovery:.1e}")];
    for ny in [32, 64] {
        let c = cfg(alpha, 32, ny);
        let sol: Solution = solve(&FormData::edge_one(c.grid()), &c).unwrap();
        let g = c.grid();
        let window = FitWindow {
            r_min: g.hy(),
            r_max: 0.25 * g.ly,
            degree: 1,
            fit_tol: c.fit_tol,
            ..FitWindow::default()
        };
        let base = (g.x_origin(), g.x_origin());
        let mut raw_g = 0.0f64;
        let mut rem_g = 0.0f64;
        for u in [&sol.u1, &sol.u2] {
            let fit = fit_singularities(u, alpha, base, &window).unwrap();
            if ny == 32 {
                nontrivial |= fit.max_singular_coeff() > 10.0 * fit.residual_max;
                detail.push(format!(
                    "max coeff {:.2e} vs residual {:.2e}",
                    fit.max_singular_coeff(),
                    fit.residual_max
                ));
            }
            let slice = edge_slice(u, base.0, base.1).unwrap();
            raw_g = raw_g.max(edge_gradient(&slice, g.hy(), window.r_max));
            rem_g = rem_g.max(edge_gradient(&subtract_singular(&slice, g.hy(), &fit), g.hy(), window.r_max));
        }
        raw.push(raw_g);
        rem.push(rem_g);
    }
    // bounded: within 10% after halving h; growing: more than 10% larger
    let rem_bounded = rem[1] <= 1.1 * rem[0];
    let raw_grows = raw[1] > 1.1 * raw[0];
    detail.push(format!("raw gradient {:.3e}->{:.3e}, remainder {:.3e}->{:.3e}", raw[0], raw[1], rem[0], rem[1]));
    let pass = recovery <= 1e-8 && nontrivial && rem_bounded && raw_grows;
    verdict(8, "singularity fit", pass, &detail.join("; "));
    assert!(pass);
}

/// Largest first difference near the edge of `u(b + p) - u(b)` at `x = 0`,
/// where `p` vanishes to fourth order at the edge.
fn perturbation_gradient(ny: usize) -> (f64, f64) {
    let alpha = 1.0;
    let c = cfg(alpha, 32, ny);
    let g = c.grid();
    let f = FormData::edge_one(g);
    let sol = solve(&f, &c).unwrap();
    let mut other = sol.traces.clone();
    for ((a, b, k), v) in other.b2.indexed_iter_mut() {
        let (x1, x2, y) = (g.x(a), g.x(b), g.y(k));
        *v += Complex64::new(y.powi(4) * (-(x1 * x1 + x2 * x2 + 2.0 * y * y)).exp(), 0.0);
    }
    let base = solve_with_traces(&f, &sol.traces, alpha).unwrap();
    let pert = solve_with_traces(&f, &other, alpha).unwrap();
    let mid = g.x_origin();
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    for (p, q) in [(&pert.u_alpha, &base.u_alpha), (&pert.u2, &base.u2)] {
        let d = &edge_slice(p, mid, mid).unwrap() - &edge_slice(q, mid, mid).unwrap();
        worst = worst.max(edge_gradient(&d, g.hy(), 0.25 * g.ly));
        size = size.max(d.iter().fold(0.0f64, |m, z| m.max(z.norm())));
    }
    (worst, size)
}

#[test]
fn c09_b_independence() {
    let _g = heavy();
    let runs: Vec<(f64, f64)> = [32, 64, 128].into_iter().map(perturbation_gradient).collect();
    let g: Vec<f64> = runs.iter().map(|r| r.0).collect();
    // a finite limit shows as contracting increments; a logarithmic drift
    // adds the same amount at every halving of h
    let (d1, d2) = (g[1] - g[0], g[2] - g[1]);
    let bounded = d2 <= 0.0 || d2 <= 0.75 * d1.abs();
    let pass = runs[0].1 > 0.0 && bounded;
    verdict(
        9,
        "b-independence",
        pass,
        &format!(
            "difference sup {:.2e}, edge gradient {:.4e} -> {:.4e} -> {:.4e}",
            runs[0].1, g[0], g[1], g[2]
        ),
    );
    assert!(pass);
}

#[test]
fn c10_lp_stabilization() {
    let _g = heavy();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for alpha in [0.0, 1.0] {
        let c = cfg(alpha, 32, 32);
        for (name, f) in [("gaussian", FormData::gaussian(c.grid())), ("edge_one", FormData::edge_one(c.grid()))] {
            let sol = solve(&f, &c).unwrap();
            let mut here = 0.0f64;
            for u in [&sol.u1, &sol.u2] {
                for row in lp_norms(u, &[2.5, 3.0, 4.0], &[0.5, 0.75, 1.0]) {
                    if row.level == 1.0 {
                        here = here.max(row.change.unwrap());
                    }
                }
            }
            worst = worst.max(here);
            detail.push(format!("a={alpha} {name} max change {here:.2e}"));
        }
    }
    let pass = worst < 0.02;
    verdict(10, "Lp stabilization", pass, &detail.join("; "));
    assert!(pass);
}
