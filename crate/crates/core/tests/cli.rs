use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use dbar_edge::config::RunConfig;
use dbar_edge::geometry::{EdgeGrid, PhysicalField};
use dbar_edge::io::Container;
use num_complex::Complex64;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dbar-edge"))
}

fn run(args: &[&str]) -> i32 {
    let out = bin().arg("--quiet").args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every CSV starts with the config line, every JSON carries the hash, and the
/// container's convention tag ends with it.
fn assert_hash_everywhere(dir: &Path, hash: &str) {
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let text = fs::read_to_string(&path).unwrap();
                assert_eq!(text.lines().next(), Some(format!("# config {hash}").as_str()), "{path:?}");
            }
            Some("json") => assert_eq!(json(&path)["config_hash"], hash, "{path:?}"),
            Some("edgn") => {
                let c = Container::read(&path).unwrap();
                assert!(c.convention.ends_with(&format!("config={hash}")), "{path:?}");
            }
            _ => continue,
        }
        seen += 1;
    }
    assert!(seen >= 3, "only {seen} outputs in {dir:?}");
}

#[test]
fn solve_gaussian_alpha_zero_has_no_coupling() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "alpha = 0\ngrid.Nx = 32\ngrid.NY = 16\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&["solve", "--config", s(&cfg), "--out", s(&out)]), 0);
    let diag = json(&out.join("diagnostics.json"));
    assert_eq!(diag["report"]["status"], "ok");
    assert_eq!(diag["report"]["u_alpha_terms"]["coupling"].as_f64(), Some(0.0));
    assert_eq!(diag["report"]["u2_terms"]["coupling"].as_f64(), Some(0.0));
    assert!(diag["report"]["u_alpha_terms"]["green"].as_f64().unwrap() > 0.0);

    assert_eq!(run(&["verify", s(&out.join("solution.edgn")), "--config", s(&cfg), "--out", s(&out)]), 0);
    let hash = RunConfig::load(&cfg).unwrap().hash();
    assert_hash_everywhere(&out, &hash);
}

#[test]
fn zero_iterations_is_non_convergence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "alpha = 1\ngrid.Nx = 32\ngrid.NY = 16\nfp.max_iter = 0\n");
    let out = tmp.path().join("out");
    assert_eq!(run(&["solve", "--config", s(&cfg), "--out", s(&out)]), 2);
    assert_eq!(json(&out.join("diagnostics.json"))["report"]["status"], "non_convergence");
    assert!(!out.join("solution.edgn").exists());
}

#[test]
fn bad_config_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "alpha = 1\nsurprise = 3\n");
    assert_eq!(run(&["solve", "--config", s(&cfg), "--out", s(&tmp.path().join("o"))]), 1);
    let missing = tmp.path().join("missing.edgn");
    assert_eq!(run(&["expand", s(&missing)]), 1);
}

fn zero_container(dir: &Path, cfg_text: &str) -> (PathBuf, PathBuf) {
    let cfg_path = write_config(dir, cfg_text);
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let grid = cfg.edge.grid();
    let mut c = Container::new(cfg.edge.alpha, grid, &cfg.hash());
    let zero = PhysicalField::zeros(grid);
    for name in ["u1", "u2", "u_alpha", "f1", "f2"] {
        c.push_field(name, &zero);
    }
    let path = dir.join("zero.edgn");
    c.write(&path).unwrap();
    (path, cfg_path)
}

#[test]
fn verify_accepts_the_zero_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let (sol, cfg) = zero_container(tmp.path(), "alpha = 1\ngrid.Nx = 8\ngrid.NY = 16\n");
    let out = tmp.path().join("v");
    assert_eq!(run(&["verify", s(&sol), "--config", s(&cfg), "--out", s(&out)]), 0);
    let v = json(&out.join("verify.json"));
    assert_eq!(v["report"]["passed"], true);
}

#[test]
fn verify_rejects_mismatched_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (sol, _) = zero_container(tmp.path(), "alpha = 1\ngrid.Nx = 8\ngrid.NY = 16\n");
    let other = tmp.path().join("other.cfg");
    fs::write(&other, "alpha = 0.5\ngrid.Nx = 8\ngrid.NY = 16\n").unwrap();
    assert_eq!(run(&["verify", s(&sol), "--config", s(&other), "--out", s(tmp.path())]), 1);
}

#[test]
fn residue_table_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    assert_eq!(run(&["residue-table", "--out", s(&out)]), 0);
    let text = fs::read_to_string(out.join("residue_table.csv")).unwrap();
    // header, config line and 100 samples of j = 0..=3
    assert_eq!(text.lines().count(), 2 + 400);
}

/// `u1 = log(Y1² + Y2²)` and `u2 = arctan(Y1/Y2)` at `alpha = 0` are members
/// of the fit model, so the leading coefficients come back as 1.
#[test]
fn fit_recovers_synthetic_logarithm() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = write_config(tmp.path(), "alpha = 0\ngrid.Nx = 8\ngrid.NY = 32\n");
    let cfg = RunConfig::load(&cfg_path).unwrap();
    let grid: EdgeGrid = cfg.edge.grid();
    let log = PhysicalField::from_fn(grid, |_, _, a, b| {
        let q = a * a + b * b;
        Complex64::new(if q > 0.0 { q.ln() } else { 0.0 }, 0.0)
    });
    let arc = PhysicalField::from_fn(grid, |_, _, a, b| {
        // at Y2 = 0 this is ±π/2, the boundary value of the arctangent
        Complex64::new(if a != 0.0 || b > 0.0 { (a / b).atan() } else { 0.0 }, 0.0)
    });
    let mut c = Container::new(0.0, grid, &cfg.hash());
    c.push_field("u1", &log);
    c.push_field("u2", &arc);
    let sol = tmp.path().join("synthetic.edgn");
    c.write(&sol).unwrap();
    let out = tmp.path().join("f");
    assert_eq!(run(&["fit", s(&sol), "--config", s(&cfg_path), "--out", s(&out)]), 0);
    let text = fs::read_to_string(out.join("fit.csv")).unwrap();
    let coeff = |name: &str| -> Complex64 {
        let row = text
            .lines()
            .find(|l| l.split(',').nth(3) == Some(name))
            .unwrap_or_else(|| panic!("{name} missing"));
        let f: Vec<&str> = row.split(',').collect();
        Complex64::new(f[4].parse().unwrap(), f[5].parse().unwrap())
    };
    assert!((coeff("a11") - 1.0).norm() < 1e-8, "{}", coeff("a11"));
    assert!(coeff("b11").norm() < 1e-8);
    assert!((coeff("b21") - 1.0).norm() < 1e-8, "{}", coeff("b21"));
    assert!(coeff("a21").norm() < 1e-8);
    assert!(!text.contains("a12"), "duplicate columns are dropped at alpha = 0");
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "alpha = 1\ngrid.Nx = 32\ngrid.NY = 32\ndata.preset = edge_one\n");
    let dirs: Vec<PathBuf> = ["a", "b"].iter().map(|d| tmp.path().join(d)).collect();
    for d in &dirs {
        assert_eq!(run(&["solve", "--config", s(&cfg), "--out", s(d)]), 0);
        let sol = d.join("solution.edgn");
        run(&["verify", s(&sol), "--config", s(&cfg), "--out", s(d)]);
        assert_eq!(run(&["fit", s(&sol), "--config", s(&cfg), "--out", s(d)]), 0);
        assert_eq!(run(&["expand", s(&sol), "--n", "1", "--out", s(d)]), 0);
    }
    let hash = RunConfig::load(&cfg).unwrap().hash();
    assert_hash_everywhere(&dirs[0], &hash);
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 8, "{names:?}");
    for n in names {
        assert_eq!(fs::read(dirs[0].join(&n)).unwrap(), fs::read(dirs[1].join(&n)).unwrap(), "{n:?}");
    }
}
