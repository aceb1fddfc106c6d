use std::path::Path;
use std::process::Command;

use conga_cli::{convergence_sweep, load_config, run_case};

fn cfg(out: &Path, overrides: &[&str]) -> conga_cli::RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    let mut c = load_config(None, &o).unwrap();
    c.output = Some(out.to_path_buf());
    c
}

/// Header row and data rows of a CSV written by the runner.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = read_csv(path);
    let c = h.iter().position(|x| x == name).unwrap();
    rows.iter().map(|r| r[c].parse().unwrap()).collect()
}

#[test]
fn poisson_run_writes_error_row_field_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(dir.path(), &["case=poisson_inhom_sincos", "degree=3", "cells=8"]);
    let r = run_case(&c).unwrap();
    let (_, rows) = read_csv(&dir.path().join("errors.csv"));
    assert_eq!(rows.len(), 1);
    assert!(r.error.unwrap() < 1e-4);
    let phi = column(&dir.path().join("phi.csv"), "value");
    assert_eq!(phi.len(), 2 * 21 * 21);
    let text = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
    assert!(text.starts_with("# conga "));
    assert!(text.lines().nth(1).unwrap().ends_with(&r.config_hash));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["quadrature"]["mass_and_moments_points"], 4);
    assert_eq!(summary["quadrature"]["error_norm_points"], 6);
    assert!(summary["tolerances"]["conformity"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["config_hash"], r.config_hash.as_str());
}

#[test]
fn square_eigenvalues_match_analytic_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    run_case(&cfg(dir.path(), &["case=eig_curlcurl_square", "degree=3", "cells=16"])).unwrap();
    let ev = column(&dir.path().join("eigenvalues.csv"), "eigenvalue");
    let exact = [1.0, 1.0, 2.0, 4.0, 4.0, 5.0, 5.0, 8.0];
    assert_eq!(ev.len(), 8);
    for (e, c) in exact.iter().zip(&ev) {
        assert!((e - c).abs() / e < 1e-3, "{e} {c}");
    }
}

#[test]
fn pulse_trace_has_constant_pseudo_energy() {
    let dir = tempfile::tempdir().unwrap();
    run_case(&cfg(dir.path(), &["case=td_maxwell_pulse", "final_time=3.2"])).unwrap();
    let trace = dir.path().join("trace.csv");
    let t = column(&trace, "time");
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    assert!((t.last().unwrap() - 3.2).abs() < 1e-12);
    let h = column(&trace, "pseudo_energy");
    assert!(h.iter().all(|v| (v - h[0]).abs() <= 1e-10 * h[0]));
}

#[test]
fn poisson_sweep_reaches_expected_order() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(dir.path(), &["case=poisson_inhom_sincos", "degree=2"]);
    let (report, _) = convergence_sweep(&c, &[4, 8, 16]).unwrap();
    assert!(report.last_order().unwrap() >= 2.8, "{report:?}");
    assert!(!report.stalled());
    assert!(dir.path().join("convergence.csv").exists());
    assert!(dir.path().join("N16").join("summary.json").exists());
}

#[test]
fn maxwell_sweep_reaches_expected_order() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(dir.path(), &["case=maxwell_inhom_sincos", "degree=3"]);
    let (report, _) = convergence_sweep(&c, &[4, 8, 16]).unwrap();
    assert!(report.last_order().unwrap() >= 3.8, "{report:?}");
}

#[test]
fn spline_solution_is_exact_and_has_no_order() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(dir.path(), &["case=poisson_hom_manufactured", "solution=\"polynomial\"", "degree=2"]);
    let (report, _) = convergence_sweep(&c, &[2, 4]).unwrap();
    assert!(report.rows.iter().all(|r| r.error < 1e-12), "{report:?}");
    assert_eq!(report.last_order(), None);
    let (_, rows) = read_csv(&dir.path().join("convergence.csv"));
    assert_eq!(rows[1][3], "N/A");
}

#[test]
fn identical_configs_give_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let o = ["case=magnetostatic_vacuum_annulus", "degree=2", "cells=4", "resolution=5"];
    let ra = run_case(&cfg(a.path(), &o)).unwrap();
    let rb = run_case(&cfg(b.path(), &o)).unwrap();
    assert_eq!(ra.config_hash, rb.config_hash);
    for f in &ra.files {
        let name = f.file_name().unwrap();
        let same = std::fs::read(f).unwrap() == std::fs::read(b.path().join(name)).unwrap();
        assert!(same, "{name:?} differs");
    }
}

#[test]
fn matrix_dumps_on_request() {
    let dir = tempfile::tempdir().unwrap();
    run_case(&cfg(dir.path(), &["case=poisson_inhom_sincos", "degree=2", "cells=3", "dump_matrices=true"])).unwrap();
    let text = std::fs::read_to_string(dir.path().join("proj0_hom.coo")).unwrap();
    let mut lines = text.lines().skip(2);
    let dims: Vec<usize> = lines.next().unwrap().trim_start_matches("% ").split(' ').map(|s| s.parse().unwrap()).collect();
    assert_eq!(dims[0], dims[1]);
    assert_eq!(lines.count(), dims[2]);
}

fn conga(args: &[&str], cwd: &Path) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_conga")).args(args).current_dir(cwd).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cwd = dir.path();
    let (code, out, _) = conga(&["list-cases"], cwd);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 9);

    let (code, _, err) = conga(&["run", "--override", "case=nope"], cwd);
    assert_eq!(code, 2, "{err}");
    let (code, _, _) = conga(&["run", "--override", "case=poisson_inhom_sincos", "--override", "cells=-3"], cwd);
    assert_eq!(code, 2);
    let (code, _, _) = conga(&["run", "--config", "missing.toml"], cwd);
    assert_eq!(code, 2);
    let (code, _, _) = conga(&["sweep", "--override", "case=td_maxwell_pulse"], cwd);
    assert_eq!(code, 2);

    // beyond the dense eigensolver limit
    let (code, _, err) = conga(&["run", "--out", "big", "--override", "case=eig_curlcurl_square", "--override", "cells=60"], cwd);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("curl-curl"), "{err}");

    let (code, out, err) = conga(
        &["run", "--out", "ok", "--override", "case=poisson_inhom_sincos", "--override", "degree=2", "--override", "cells=4"],
        cwd,
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("error"));
    assert!(cwd.join("ok").join("summary.json").exists());
}

#[test]
fn config_file_with_domain_file() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("inputs");
    std::fs::create_dir(&sub).unwrap();
    std::fs::write(
        sub.join("split.toml"),
        "[[patch]]\nkind = \"rectangle\"\nlower = [0.0, 0.0]\nupper = [0.5, 1.0]\n\
         [[patch]]\nkind = \"rectangle\"\nlower = [0.5, 0.0]\nupper = [1.0, 1.0]\n",
    )
    .unwrap();
    std::fs::write(sub.join("run.toml"), "case = \"poisson_inhom_sincos\"\ndomain_file = \"split.toml\"\ndegree = 2\ncells = 4\n")
        .unwrap();
    let (code, _, err) = conga(&["run", "--config", "inputs/run.toml", "--out", "file_run"], dir.path());
    assert_eq!(code, 0, "{err}");
    let (code, _, _) = conga(&["run", "--out", "builtin_run", "--override", "case=poisson_inhom_sincos", "--override", "degree=2", "--override", "cells=4"], dir.path());
    assert_eq!(code, 0);
    // the file describes the built-in two-patch square
    let a = column(&dir.path().join("file_run/errors.csv"), "l2_error");
    let b = column(&dir.path().join("builtin_run/errors.csv"), "l2_error");
    assert!((a[0] - b[0]).abs() <= 1e-14 * b[0]);
}
