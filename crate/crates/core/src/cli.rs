//! Subcommand drivers. Each returns a process exit code: 0 on success, 1 on
//! configuration or input errors, 2 when the trace fixed point does not
//! converge, 3 when a hard threshold fails (reports are still written).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::geometry::{combine_components, FormData, PhysicalField};
use crate::io::{csv_with_hash, sha256_hex, write_text, Container};
use crate::singularity::expansion::EdgeJets;
use crate::singularity::fit::{fit_singularities, SingularFit, SINGULAR_NAMES};
use crate::singularity::{expand_jets, residue_table};
use crate::traces::ConvergenceHistory;
use crate::verify::{self, ResidualReport};
use crate::{solver, EdgeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NON_CONVERGENCE: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;

pub const SOLUTION_FILE: &str = "solution.edgn";
/// Dirichlet face values must stay below this fraction of the field scale.
pub const DIRICHLET_TOL: f64 = 1e-6;
/// Derivative residuals may exceed the interior residual by this factor.
pub const FACE_TO_INTERIOR: f64 = 10.0;
/// Interior margin and derivative-check distance as fractions of `L_Y`.
pub const INTERIOR_MARGIN_FRAC: f64 = 0.25;
pub const EDGE_DELTA_FRAC: f64 = 0.1;
/// Box levels for the Lᵖ table.
pub const LP_LEVELS: [f64; 3] = [0.5, 0.75, 1.0];
/// Residue table tolerance on the relative error.
pub const RESIDUE_TOL: f64 = 1e-6;

fn report_error(e: &EdgeError) -> i32 {
    eprintln!("error: {e}");
    match e {
        EdgeError::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        _ => EXIT_ERROR,
    }
}

fn say(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

fn json_text(hash: &str, report: Value) -> String {
    let v = json!({ "config_hash": hash, "report": report });
    let mut s = serde_json::to_string_pretty(&v).expect("json values serialize");
    s.push('\n');
    s
}

fn out_dir(cfg: Option<&RunConfig>, out: Option<&Path>) -> PathBuf {
    match (out, cfg) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(c)) => c.out_dir.clone(),
        (None, None) => PathBuf::from("out"),
    }
}

fn history_json(h: &ConvergenceHistory) -> Value {
    Value::Array(
        h.rows
            .iter()
            .map(|r| json!({"iter": r.iter, "sup_change_b2": r.sup_change_b2, "sup_change_balpha": r.sup_change_balpha}))
            .collect(),
    )
}

/// `solve`: fixed-point traces, both components, container and diagnostics.
pub fn cmd_solve(config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let cfg = match RunConfig::load(config) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(Some(&cfg), out);
    let hash = cfg.hash();
    let f = match cfg.form_data() {
        Ok(f) => f,
        Err(e) => return report_error(&e),
    };
    say(quiet, &format!("solving alpha = {} on {:?}", cfg.edge.alpha, cfg.edge.grid()));
    let sol = match solver::solve(&f, &cfg.edge) {
        Ok(s) => s,
        Err(EdgeError::NonConvergence { history }) => {
            let diag = json!({"status": "non_convergence", "alpha": cfg.edge.alpha, "history": history_json(&history)});
            let written = write_text(&dir, "convergence.csv", &csv_with_hash(&hash, &history.to_csv()))
                .and_then(|_| write_text(&dir, "diagnostics.json", &json_text(&hash, diag)));
            if let Err(e) = written {
                return report_error(&e);
            }
            eprintln!("error: boundary traces did not converge after {} iterations", history.rows.len());
            return EXIT_NON_CONVERGENCE;
        }
        Err(e) => return report_error(&e),
    };
    let mut c = Container::new(cfg.edge.alpha, cfg.edge.grid(), &hash);
    c.push_field("u1", &sol.u1);
    c.push_field("u2", &sol.u2);
    c.push_field("u_alpha", &sol.u_alpha);
    c.push_field("f1", &f.f1);
    c.push_field("f2", &f.f2);
    c.push("b2", sol.traces.b2.clone().into_dyn());
    c.push("b_alpha", sol.traces.b_alpha.clone().into_dyn());
    let diag = json!({
        "status": "ok",
        "alpha": cfg.edge.alpha,
        "grid": cfg.edge.grid(),
        "iterations": sol.history.rows.len(),
        "history": history_json(&sol.history),
        "u_alpha_terms": sol.alpha_terms,
        "u2_terms": sol.two_terms,
        "max_abs": {"u1": sol.u1.max_abs(), "u2": sol.u2.max_abs(), "u_alpha": sol.u_alpha.max_abs()},
    });
    let written = std::fs::create_dir_all(&dir)
        .map_err(EdgeError::from)
        .and_then(|_| c.write(&dir.join(SOLUTION_FILE)))
        .and_then(|_| write_text(&dir, "diagnostics.json", &json_text(&hash, diag)))
        .and_then(|_| write_text(&dir, "convergence.csv", &csv_with_hash(&hash, &sol.history.to_csv())));
    if let Err(e) = written {
        return report_error(&e);
    }
    say(quiet, &format!("wrote {}", dir.display()));
    EXIT_OK
}

fn load_pair(solution: &Path, config: &Path) -> Result<(Container, RunConfig), EdgeError> {
    let cfg = RunConfig::load(config)?;
    let c = Container::read(solution)?;
    if c.grid != cfg.edge.grid() || c.alpha != cfg.edge.alpha {
        return Err(EdgeError::GridMismatch(format!(
            "solution has alpha = {} on {:?}, config has alpha = {} on {:?}",
            c.alpha,
            c.grid,
            cfg.edge.alpha,
            cfg.edge.grid()
        )));
    }
    Ok((c, cfg))
}

/// Verification reports and whether every hard threshold passed.
pub struct VerifyOutcome {
    pub reports: Vec<ResidualReport>,
    pub lp: Vec<verify::LpRow>,
    pub edge: verify::EdgeConsistency,
    pub failures: Vec<String>,
}

pub fn verify_fields(
    u_alpha: &PhysicalField,
    u2: &PhysicalField,
    f: &FormData,
    alpha: f64,
    p_list: &[f64],
) -> Result<VerifyOutcome, EdgeError> {
    let ly = u2.grid.ly;
    let interior = verify::interior_residual(u_alpha, u2, f, alpha, INTERIOR_MARGIN_FRAC * ly)?;
    let faces = verify::boundary_residuals(u_alpha, u2, alpha, EDGE_DELTA_FRAC * ly)?;
    let edge = verify::edge_consistency(u_alpha, u2)?;
    let u1 = crate::geometry::recover_u1(u_alpha, u2, alpha)?;
    let mut lp = verify::lp_norms(&u1, p_list, &LP_LEVELS);
    lp.extend(verify::lp_norms(u2, p_list, &LP_LEVELS));
    let scale = u_alpha.max_abs().max(u2.max_abs());
    let interior_sup = interior.iter().fold(0.0f64, |m, r| m.max(r.sup));
    let mut failures = Vec::new();
    for r in &faces {
        let ok = match r.name.as_str() {
            "dir1" | "dir2" => r.sup <= DIRICHLET_TOL * scale,
            "der_y1" | "der_y2" => r.sup <= FACE_TO_INTERIOR * interior_sup,
            _ => true,
        };
        if !ok {
            failures.push(format!("{} = {:e}", r.name, r.sup));
        }
    }
    let mut reports = interior.to_vec();
    reports.extend(faces);
    Ok(VerifyOutcome {
        reports,
        lp,
        edge,
        failures,
    })
}

/// `verify`: interior and face residuals, edge consistency, Lᵖ table.
pub fn cmd_verify(solution: &Path, config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let (c, cfg) = match load_pair(solution, config) {
        Ok(p) => p,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(Some(&cfg), out);
    let hash = cfg.hash();
    let run = || -> Result<VerifyOutcome, EdgeError> {
        let f = c.form_data()?;
        verify_fields(&c.field("u_alpha")?, &c.field("u2")?, &f, c.alpha, &cfg.p_list)
    };
    let outcome = match run() {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    let summary = json!({
        "residuals": outcome.reports,
        "edge": outcome.edge,
        "lp": outcome.lp,
        "failures": outcome.failures,
        "passed": outcome.failures.is_empty(),
    });
    let written = write_text(&dir, "residuals.csv", &csv_with_hash(&hash, &verify::reports_to_csv(&outcome.reports)))
        .and_then(|_| write_text(&dir, "lp.csv", &csv_with_hash(&hash, &verify::lp_to_csv(&outcome.lp))))
        .and_then(|_| write_text(&dir, "verify.json", &json_text(&hash, summary)));
    if let Err(e) = written {
        return report_error(&e);
    }
    if outcome.failures.is_empty() {
        say(quiet, "all verification thresholds passed");
        EXIT_OK
    } else {
        eprintln!("threshold failures: {}", outcome.failures.join("; "));
        EXIT_THRESHOLD
    }
}

fn fit_rows(out: &mut String, x: (f64, f64), component: usize, fit: &SingularFit) {
    for (kind, coeffs) in fit.singular.iter().enumerate() {
        if !fit.active[kind] {
            continue;
        }
        let base = SINGULAR_NAMES[kind];
        // a1 of component 2 is written a21
        let name = format!("{}{}{}", &base[..1], component, &base[1..]);
        for (&(i, j), c) in fit.monomials.iter().zip(coeffs) {
            let tag = if (i, j) == (0, 0) {
                name.clone()
            } else {
                format!("{name}[Y1^{i}Y2^{j}]")
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{:e},{:e},{:e},{:e}",
                x.0, x.1, component, tag, c.re, c.im, fit.residual_max, fit.condition
            );
        }
    }
}

/// Fits of `u1` and `u2` at the `x = 0` base point.
pub fn fit_container(c: &Container, cfg: &RunConfig) -> Result<Vec<(usize, SingularFit)>, EdgeError> {
    let base = (c.grid.x_origin(), c.grid.x_origin());
    let window = cfg.fit_window();
    let mut fits = Vec::new();
    for (component, name) in [(1, "u1"), (2, "u2")] {
        fits.push((component, fit_singularities(&c.field(name)?, c.alpha, base, &window)?));
    }
    Ok(fits)
}

/// `fit`: singular coefficients of `u1` and `u2` near the edge.
pub fn cmd_fit(solution: &Path, config: &Path, out: Option<&Path>, quiet: bool) -> i32 {
    let (c, cfg) = match load_pair(solution, config) {
        Ok(p) => p,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(Some(&cfg), out);
    let hash = cfg.hash();
    let fits = match fit_container(&c, &cfg) {
        Ok(f) => f,
        Err(e) => return report_error(&e),
    };
    let mut csv = String::from("x1,x2,component,coefficient,re,im,residual,condition\n");
    let mut summary = Vec::new();
    for (component, fit) in &fits {
        fit_rows(&mut csv, (0.0, 0.0), *component, fit);
        summary.push(json!({
            "component": component,
            "points": fit.points,
            "rank": fit.rank,
            "condition": fit.condition,
            "residual_max": fit.residual_max,
            "residual_rms": fit.residual_rms,
            "max_singular_coefficient": fit.max_singular_coeff(),
            "nontrivial": fit.max_singular_coeff() > 10.0 * fit.residual_max,
            "reliable": fit.reliable,
        }));
    }
    let written = write_text(&dir, "fit.csv", &csv_with_hash(&hash, &csv))
        .and_then(|_| write_text(&dir, "fit.json", &json_text(&hash, Value::Array(summary))));
    if let Err(e) = written {
        return report_error(&e);
    }
    if fits.iter().all(|(_, f)| f.reliable) {
        say(quiet, "fits reliable");
        EXIT_OK
    } else {
        eprintln!("at least one fit is ill-conditioned");
        EXIT_THRESHOLD
    }
}

/// `residue-table`: closed form against quadrature at seeded random points.
/// `residue-table`: closed form against quadrature at seeded random points.
pub fn cmd_residue_table(j_max: u32, samples: usize, out: Option<&Path>, quiet: bool) -> i32 {
    let dir = out_dir(None, out);
    let hash = sha256_hex(format!("residue-table j_max={j_max} samples={samples}\n").as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let mut csv = String::from("j,eta1,alpha,y2,closed_re,closed_im,quad_re,quad_im,rel_error\n");
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let eta1 = sign * rng.gen_range(0.2..3.0);
        let alpha = rng.gen_range(0.0..3.0);
        let y2 = rng.gen_range(0.2..3.0);
        let js: Vec<u32> = (0..=j_max).collect();
        let rows = match residue_table(&js, &[eta1], alpha, &[y2], 1e-12) {
            Ok(r) => r,
            Err(e) => return report_error(&e),
        };
        for r in rows {
            let err = r.relative_error();
            worst = worst.max(err);
            let _ = writeln!(
                csv,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.j, r.eta1, r.alpha, r.y2, r.closed.re, r.closed.im, r.quadrature.re, r.quadrature.im, err
            );
        }
    }
    if let Err(e) = write_text(&dir, "residue_table.csv", &csv_with_hash(&hash, &csv)) {
        return report_error(&e);
    }
    if worst <= RESIDUE_TOL {
        say(quiet, &format!("max relative error {worst:e}"));
        EXIT_OK
    } else {
        eprintln!("max relative error {worst:e} exceeds {RESIDUE_TOL:e}");
        EXIT_THRESHOLD
    }
}

/// `expand`: asymptotic terms of `û_alpha` of order `n`.
pub fn cmd_expand(solution: &Path, n: usize, out: Option<&Path>, quiet: bool) -> i32 {
    let c = match Container::read(solution) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let dir = out_dir(None, out);
    let hash = c.convention.rsplit_once("config=").map(|(_, h)| h.to_string()).unwrap_or_default();
    let run = || -> Result<_, EdgeError> {
        let fa = combine_components(&c.field("f1")?, &c.field("f2")?, c.alpha)?;
        let jets = EdgeJets::from_grid(&fa, &c.trace("b2")?, 2 * n)?;
        expand_jets(&jets, c.alpha, n)
    };
    let e = match run() {
        Ok(e) => e,
        Err(err) => return report_error(&err),
    };
    let mid = c.grid.x_origin();
    let mut csv = String::from("source,j,k,l,m,degree,max_abs_coefficient,re_at_lambda0,im_at_lambda0\n");
    for t in &e.terms {
        let z: Complex64 = t.coefficient[[mid, mid]];
        let _ = writeln!(
            csv,
            "{:?},{},{},{},{},{},{:e},{:e},{:e}",
            t.source,
            t.j,
            t.k,
            t.l,
            t.m,
            t.degree(),
            t.max_coefficient(),
            z.re,
            z.im
        );
    }
    if let Err(err) = write_text(&dir, "expansion.csv", &csv_with_hash(&hash, &csv)) {
        return report_error(&err);
    }
    say(quiet, &format!("{} terms up to degree {}", e.terms.len(), e.degree_limit));
    EXIT_OK
}
