use std::path::Path;
use std::process::{Command, Output};

fn optomech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_body(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn point_reports_measures() {
    let out = optomech(&["point"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in ["spectral abscissa", "R_min =", "C_t", "symplectic spectrum", "status: "] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }
}

#[test]
fn point_exit_codes() {
    assert_eq!(optomech(&["point", "--set", "G=0.4"]).status.code(), Some(2));
    assert_eq!(optomech(&["point", "--set", "f_s=0.3"]).status.code(), Some(3));
    let bad = optomech(&["point", "--set", "kapa=0.1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("kapa"));
    assert_eq!(optomech(&["point", "--config", "/nonexistent/x.toml"]).status.code(), Some(1));
    assert_eq!(optomech(&["point", "--bogus"]).status.code(), Some(1));
}

#[test]
fn config_file_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
omega_m_hz = 1e7

[params]
n_th = 500

[sweep]
name = "map"
outputs = ["R_min", "C_t", "stable"]
plot = "R_min"

[[sweep.axis]]
param = "J"
min = 0.0
max = 0.4
count = 5

[[sweep.axis]]
param = "G"
min = 0.05
max = 0.4
count = 6
"#,
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = cfg.to_str().unwrap();
    let run1 = optomech(&["sweep", "--config", cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]);
    let run2 = optomech(&["sweep", "--config", cfg, "--out", b.to_str().unwrap(), "--jobs", "4", "--no-svg"]);
    assert_eq!(run1.status.code(), Some(0), "{}", stderr(&run1));
    assert_eq!(run2.status.code(), Some(0), "{}", stderr(&run2));
    assert!(stdout(&run1).contains("max R_min"));
    let body = csv_body(&a.join("map.csv"));
    assert_eq!(body, csv_body(&b.join("map.csv")));
    assert!(a.join("map.svg").exists());
    assert!(!b.join("map.svg").exists());
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines[0], "J,G,R_min,R_min_raw,C_t,stable,status");
    assert_eq!(lines.len(), 31);
    assert!(lines.iter().any(|l| l.ends_with(",,,,0,unstable")));
    let text = std::fs::read_to_string(a.join("map.csv")).unwrap();
    assert!(text.contains("# note = omega_m = 10000000 Hz"));
    assert!(text.contains("# n_th = 500"));
}

#[test]
fn repro_writes_every_panel() {
    let dir = tempfile::tempdir().unwrap();
    let out = optomech(&["repro", "fig5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("fig5.csv").exists());
    let svg = std::fs::read_to_string(dir.path().join("fig5.svg")).unwrap();
    assert!(svg.contains("<polyline"));
    assert_eq!(optomech(&["repro", "fig1"]).status.code(), Some(1));
}

#[test]
fn repro_accepts_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = optomech(&["repro", "fig5", "--out", dir.path().to_str().unwrap(), "--no-svg", "--set", "n_th=1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("fig5.csv")).unwrap();
    assert!(text.contains("# n_th = 1000"));
}

#[test]
fn validate_passes_and_detects_faults() {
    let ok = optomech(&["validate"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert_eq!(stdout(&ok).matches("[PASS]").count(), 7);
    let broken = optomech(&["validate", "--inject-fault"]);
    assert_eq!(broken.status.code(), Some(4));
    assert!(stdout(&broken).contains("[FAIL]"));
}
