use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use modlab_core::io::write_vector_field;
use modlab_core::{Grid, NormTag, VectorField};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn modlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modlab"))
        .args(args)
        .env("MODLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn identity_field(dir: &Path) -> PathBuf {
    let f =
        VectorField::from_fn(Grid::unit(2, 16).unwrap(), 2, NormTag::Linf, |x| x.to_vec()).unwrap();
    let path = dir.join("id.csv");
    write_vector_field(&path, &f).unwrap();
    path
}

#[test]
fn modulus_of_bundled_segments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    let rho = dir.path().join("rho.csv");
    let o = modlab(&[
        "modulus",
        "--family",
        p(&fixture("segments.json")),
        "--grid",
        p(&fixture("grid.json")),
        "--p",
        "2",
        "--tol",
        "1e-6",
        "--out",
        p(&out),
        "--rho-out",
        p(&rho),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert!((r["summary"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert_eq!(r["input_digests"].as_object().unwrap().len(), 2);
    assert!(rho.exists() && rho.with_extension("json").exists());
}

#[test]
fn malformed_grid_exits_2() {
    let o = modlab(&[
        "modulus",
        "--family",
        p(&fixture("segments.json")),
        "--grid",
        p(&fixture("bad_grid.json")),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn missing_input_and_bad_flags_exit_2() {
    assert_eq!(
        modlab(&["norms", "--f", "/nonexistent/f.csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(modlab(&["norms"]).status.code(), Some(2));
    assert_eq!(modlab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn norms_reports_and_rejects_small_p() {
    let dir = tempfile::tempdir().unwrap();
    let f = identity_field(dir.path());
    let out = dir.path().join("n.json");
    let o = modlab(&["norms", "--f", p(&f), "--p", "2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    for key in [
        "lp",
        "w_norm",
        "r_norm",
        "ratio",
        "sqrtN_margin",
        "gstar_mode",
    ] {
        assert!(!r["summary"][key].is_null(), "{key}");
    }
    let ratio = r["summary"]["ratio"].as_f64().unwrap();
    assert!(ratio > 1.0 && ratio < 2f64.sqrt());

    let o = modlab(&["norms", "--f", p(&f), "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn weakcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = Grid::unit(2, 32).unwrap();
    let f = VectorField::from_fn(g.clone(), 1, NormTag::L2, |x| vec![x[0] * x[0]]).unwrap();
    let good = VectorField::from_fn(g.clone(), 1, NormTag::L2, |x| vec![2.0 * x[0]]).unwrap();
    let bad = VectorField::zeros(g, 1, NormTag::L2).unwrap();
    for (name, field) in [("f.csv", &f), ("good.csv", &good), ("bad.csv", &bad)] {
        write_vector_field(&dir.path().join(name), field).unwrap();
    }
    let run = |cand: &str| {
        let out = dir.path().join(format!("{cand}.json"));
        let o = modlab(&[
            "weakcheck",
            "--f",
            p(&dir.path().join("f.csv")),
            "--cand",
            p(&dir.path().join(cand)),
            "--axis",
            "0",
            "--bumps",
            p(&fixture("bumps.json")),
            "--tol",
            "5e-3",
            "--out",
            p(&out),
        ]);
        (o.status.code(), report(&out))
    };
    let (code, r) = run("good.csv");
    assert_eq!(code, Some(0));
    assert_eq!(r["summary"]["bumps"].as_array().unwrap().len(), 2);
    let (code, r) = run("bad.csv");
    assert_eq!(code, Some(1));
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == false));
}

#[test]
fn acbound_passes_with_lipschitz_bound() {
    let dir = tempfile::tempdir().unwrap();
    let f = identity_field(dir.path());
    let g =
        VectorField::from_fn(Grid::unit(2, 16).unwrap(), 1, NormTag::L2, |_| vec![1.0]).unwrap();
    write_vector_field(&dir.path().join("g.csv"), &g).unwrap();
    let o = modlab(&[
        "acbound",
        "--f",
        p(&f),
        "--g",
        p(&dir.path().join("g.csv")),
        "--curve",
        p(&fixture("diagonal.csv")),
        "--out",
        p(&dir.path().join("a.json")),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn counterexample_is_deterministic_and_exports_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plots = dir.path().join("plots");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = modlab(&[
            "counterexample",
            "--t",
            "0.70710678",
            "--ladder",
            "1e-1,1e-2,1e-3",
            "--out",
            p(&out),
            "--plot-dir",
            p(&plots),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let mut v = report(&out);
        v["wall_time_s"] = Value::Null;
        v
    };
    let (a, b) = (run("a.json"), run("b.json"));
    assert_eq!(a, b);
    assert_eq!(
        a["summary"]["verdict"],
        "R-side bounded, W-side quotients non-Cauchy"
    );
    let csv = fs::read_to_string(plots.join("dichotomy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,M,gap,r_norm"));
    assert_eq!(lines.count(), 3);

    let text = fs::read_to_string(dir.path().join("a.json")).unwrap();
    assert!(
        text.contains("\"t\": 7.0710678000000005e-1"),
        "floats carry 17 significant digits"
    );
}

#[test]
fn counterexample_scalar_control_and_empty_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = modlab(&[
        "counterexample",
        "--m",
        "1",
        "--ladder",
        "1e-1,1e-2,1e-3,1e-4",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        report(&out)["summary"]["verdict"],
        "RNP-like: quotients converge"
    );

    let plots = dir.path().join("none");
    let o = modlab(&[
        "counterexample",
        "--ladder",
        "",
        "--out",
        p(&out),
        "--plot-dir",
        p(&plots),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(report(&out)["summary"]["rungs"]
        .as_array()
        .unwrap()
        .is_empty());
}

#[test]
fn suite_subset_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.json");
    let o = modlab(&["suite", "--only", "4,7", "--out", p(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let r = report(&out);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["name"].as_str().unwrap().starts_with("criterion ")));
    assert!(String::from_utf8_lossy(&o.stderr).contains("criterion 7: PASS"));
}

#[test]
fn bad_thread_cap_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_modlab"))
        .args(["counterexample", "--ladder", "1e-1"])
        .env("MODLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
