use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fringelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fringelab"))
        .args(args)
        .env_remove("FRINGELAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_preset_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("runs/fig6a");
    let out = fringelab(&[
        "simulate",
        "--scenario",
        "fig6a",
        "--res",
        "81",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    for ext in ["pgm", "f64", "json"] {
        assert!(prefix.with_extension(ext).is_file(), "{ext}");
    }
    let meta = json_file(&prefix.with_extension("json"));
    assert!((meta["schmidt"]["k"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let pgm = std::fs::read(prefix.with_extension("pgm")).unwrap();
    let header = b"P5\n81 81\n65535\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(pgm.len(), header.len() + 2 * 81 * 81);
    assert_eq!(
        std::fs::metadata(prefix.with_extension("f64"))
            .unwrap()
            .len(),
        8 * 81 * 81
    );
}

#[test]
fn simulate_canonical_k_records_relative_phase() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("k14");
    let out = fringelab(&[
        "simulate",
        "--method",
        "amplitude",
        "--k",
        "1.4",
        "--res",
        "21",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let meta = json_file(&prefix.with_extension("json"));
    let expected = (2.0f64 - 2.0 / 1.4).sqrt().asin();
    let got = meta["state"]["delta_phi"].as_f64().unwrap();
    assert!((got - expected).abs() < 1e-12, "{got}");
    assert!((meta["schmidt"]["k"].as_f64().unwrap() - 1.4).abs() < 1e-12);
}

#[test]
fn explicit_angles_accept_pi_fractions() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("p");
    let out = fringelab(&[
        "simulate",
        "--method",
        "phase",
        "--theta",
        "pi/4",
        "--phi-x",
        "0",
        "--phi-y",
        "5pi/21",
        "--res",
        "11",
        "--out",
        prefix.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let meta = json_file(&prefix.with_extension("json"));
    let dphi = meta["state"]["delta_phi"].as_f64().unwrap();
    assert!((dphi - 5.0 * std::f64::consts::PI / 21.0).abs() < 1e-15);
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = fringelab(&[
        "simulate",
        "--scenario",
        "nosuch",
        "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuch"));
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn simulate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let prefix = dir.path().join(name);
        let out = fringelab(&[
            "simulate",
            "--scenario",
            "fig3d",
            "--res",
            "101",
            "--out",
            prefix.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        ["pgm", "f64", "json"].map(|ext| std::fs::read(prefix.with_extension(ext)).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a[0], b[0]);
    assert_eq!(a[1], b[1]);
    // sidecars differ only if they embed the path, which they do not
    assert_eq!(a[2], b[2]);
}

#[test]
fn analyze_preset_estimates_k() {
    let out = fringelab(&["analyze", "--scenario", "fig7b"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let rep: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let k = rep["k_estimate"].as_f64().unwrap();
    assert!((k - 1.4).abs() < 0.05, "{k}");
    assert_eq!(rep["symmetry"].as_array().unwrap().len(), 4);
    assert!(rep["axial_ratio"].is_object());
}

#[test]
fn analyze_files_of_separable_run() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("fig2a");
    let p = prefix.to_str().unwrap();
    assert_eq!(
        code(&fringelab(&[
            "simulate",
            "--scenario",
            "fig2a",
            "--window",
            "0.03",
            "--res",
            "301",
            "--out",
            p
        ])),
        0
    );
    let report = dir.path().join("report.json");
    let out = fringelab(&["analyze", "--input", p, "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");
    let rep = json_file(&report);
    assert_eq!(rep["classification"], "Separable");
    let h = rep["symmetry"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["orientation"] == "Horizontal")
        .unwrap();
    let pitch = 0.06 / 301.0;
    assert!(h["offset"].as_f64().unwrap().abs() < 0.05 * pitch, "{h}");
    assert!(rep["axial_ratio"].is_null());
}

#[test]
fn analyze_truncated_grid_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("cut");
    let p = prefix.to_str().unwrap();
    assert_eq!(
        code(&fringelab(&[
            "simulate",
            "--scenario",
            "fig5a",
            "--res",
            "31",
            "--out",
            p
        ])),
        0
    );
    let grid = prefix.with_extension("f64");
    let bytes = std::fs::read(&grid).unwrap();
    std::fs::write(&grid, &bytes[..bytes.len() - 8]).unwrap();
    let out = fringelab(&["analyze", "--input", p]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("metadata"));
}

fn parse_csv(text: &str) -> (String, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn curve_rows_increase_monotonically() {
    let out = fringelab(&["curve", "--from", "1.05", "--to", "1.95", "--step", "0.05"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(header, "K,R_analytic,R_numeric");
    assert_eq!(rows.len(), 19);
    for w in rows.windows(2) {
        assert!(w[1][1] > w[0][1] && w[1][2] > w[0][2]);
    }
    for r in &rows {
        assert!((r[1] - r[2]).abs() < 2e-3 * r[1], "{r:?}");
    }
}

#[test]
fn curve_covers_the_figure_k_set() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let out = fringelab(&[
        "curve",
        "--from",
        "1.2",
        "--to",
        "1.8",
        "--step",
        "0.2",
        "--analytic-only",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let (header, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header, "K,R_analytic");
    let ks: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(ks, [1.2, 1.4, 1.6, 1.8]);
    assert!((rows[0][1] - 1.445_141_11).abs() < 1e-8);
}

#[test]
fn curve_at_k_two_is_a_domain_error() {
    let out = fringelab(&["curve", "--from", "2.0", "--to", "2.0", "--step", "0.1"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain"));
}

#[test]
fn verify_full_suite_passes() {
    let out = fringelab(&["verify"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert_eq!(
        text.lines().filter(|l| l.starts_with("[PASS]")).count(),
        10,
        "{text}"
    );
}

#[test]
fn verify_injected_gain_fails_bound_check() {
    let out = fringelab(&["verify", "--inject-gain", "1.01", "--check", "6"]);
    assert_eq!(code(&out), 3, "{}", stdout(&out));
    assert!(stdout(&out).contains("[FAIL]  6"));
}

#[test]
fn verify_json_is_machine_readable() {
    let out = fringelab(&["verify", "--json", "--check", "1", "--check", "10"]);
    assert_eq!(code(&out), 0);
    let rep: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(rep["passed"], true);
    let ids: Vec<u64> = rep["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids, [1, 10]);
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_fringelab"))
        .args([
            "curve",
            "--from",
            "1.2",
            "--to",
            "1.3",
            "--step",
            "0.1",
            "--analytic-only",
        ])
        .env("FRINGELAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);

    let capped = Command::new(env!("CARGO_BIN_EXE_fringelab"))
        .args([
            "curve",
            "--from",
            "1.2",
            "--to",
            "1.3",
            "--step",
            "0.1",
            "--analytic-only",
        ])
        .env("FRINGELAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&capped), 0);
}

#[test]
fn help_and_bad_flags() {
    assert_eq!(code(&fringelab(&["--help"])), 0);
    assert_eq!(code(&fringelab(&["--version"])), 0);
    assert_eq!(code(&fringelab(&["simulate", "--bogus"])), 1);
    assert_eq!(
        code(&fringelab(&[
            "simulate",
            "--scenario",
            "fig2a",
            "--k",
            "1.3",
            "--out",
            "x"
        ])),
        1
    );
}
