use std::path::Path;
use std::process::{Command, Output};

fn pme_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pme-lab")).args(args).env_remove("PME_LAB_THREADS").output().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn list_names_every_suite_and_is_stable() {
    let a = pme_lab(&["list"]);
    let b = pme_lab(&["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = text(&a.stdout);
    assert!(out.contains("green-suite: gaussian_verify (Prop. Gaussian estimate)"), "{out}");
    for suite in ["geometry", "bessel", "green", "linear", "nonlinear", "transform"] {
        let n = out.lines().filter(|l| l.starts_with(&format!("{suite}-suite: "))).count();
        assert!(n >= 3, "{suite} lists {n} checks");
    }
}

#[test]
fn minimal_geometry_config_passes_and_reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "experiment = \"geometry-suite\"\nsigma = 0.0\ndimension = 1\n");
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let o = pme_lab(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}{}", text(&o.stdout), text(&o.stderr));
        let stdout = text(&o.stdout);
        for check in ["quasi_triangle", "doubling", "sandwich"] {
            assert!(stdout.contains(check), "missing {check} in\n{stdout}");
        }
        let report = std::fs::read(out_dir.join("report.csv")).unwrap();
        let constants = std::fs::read(out_dir.join("constants.csv")).unwrap();
        assert!(out_dir.join("timings.csv").exists());
        reports.push((report, constants));
    }
    assert_eq!(reports[0], reports[1]);
    let header = text(&reports[0].0);
    assert!(header.starts_with("suite,check,anchor,verdict,measured,limit,tolerance_source,detail\n"));
}

#[test]
fn sigma_of_minus_one_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "experiment = \"geometry-suite\"\nsigma = -1.0\n");
    let o = pme_lab(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("sigma must exceed -1"), "{}", text(&o.stderr));
}

#[test]
fn unknown_keys_are_named_in_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "experiment = \"geometry-suite\"\n[tolerances]\nwronskain = 1e-8\n");
    let o = pme_lab(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("wronskain"), "{}", text(&o.stderr));
}

#[test]
fn large_epsilon_fails_with_a_contraction_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "nl.toml",
        "experiment = \"nonlinear-suite\"\nsigma = 0.0\ndimension = 1\n[nonlinear]\nepsilon = 0.5\n",
    );
    let o = pme_lab(&["run", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stdout).contains("contraction failure"), "{}", text(&o.stdout));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "experiment = \"geometry-suite\"\n");
    let o = Command::new(env!("CARGO_BIN_EXE_pme-lab"))
        .args(["run", &cfg])
        .env("PME_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plots_flag_writes_svg_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", "experiment = \"geometry-suite\"\nsigma = 1.0\n");
    let out_dir = dir.path().join("o");
    let o = pme_lab(&["run", &cfg, "--out", out_dir.to_str().unwrap(), "--plots"]);
    assert_eq!(o.status.code(), Some(0));
    let svgs: Vec<_> = std::fs::read_dir(out_dir.join("plots")).unwrap().collect();
    assert!(!svgs.is_empty());
}
