use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use llstab::cli_io::{SCHEMA_VERSION, parse_config, read_results};

fn llstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_llstab"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_on_defaults_passes() {
    let out = llstab(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["lemma1", "lemma2", "lemma3", "collinear"] {
        assert!(text.contains(name), "{text}");
    }
    assert!(text.contains("orders"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = llstab(&["simulate", "--config", "/nonexistent/llstab.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8(out.stderr)
            .unwrap()
            .contains("/nonexistent/llstab.cfg")
    );
}

#[test]
fn bad_config_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "# gains\ngrid.n = 8\ncontrol.k = 0.6\n");
    let out = llstab(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("control.k"), "{err}");
}

#[test]
fn zero_first_component_warns_but_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\ncontrol.r = 0, 1, 0\nstabilize.t_end = 0.5\nstabilize.stride = 100\n",
    );
    let out_dir = dir.path().join("out");
    let out = llstab(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("warning"));
}

#[test]
fn blow_up_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // far beyond the explicit stability limit
    let cfg = write_config(
        dir.path(),
        "grid.n = 64\nintegrator.dt = 0.01\nintegrator.constraint = free\nstabilize.t_end = 50\n",
    );
    let out_dir = dir.path().join("out");
    let out = llstab(&[
        "simulate",
        "--quiet",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn simulate_writes_a_readable_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 16\nstabilize.t_end = 2\nstabilize.stride = 200\n",
    );
    let out_dir = dir.path().join("out");
    let out = llstab(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
        "--seedless",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let bundle = read_results(&out_dir).unwrap();
    assert!(bundle.trajectory.len() > 2);
    assert_eq!(bundle.stabilization.as_ref().unwrap().violations, 0);
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains(&format!("schema_version = {SCHEMA_VERSION}")));

    // the echoed config is canonical: it parses to the same configuration
    let echo = fs::read_to_string(out_dir.join("config.txt")).unwrap();
    let reparsed = parse_config(&echo).unwrap().config;
    assert_eq!(reparsed, bundle.config);
    assert_eq!(parse_config(&reparsed.to_text()).unwrap().config, reparsed);

    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,V,dVdt_est,bound,err_norm,cross_h_norm_sq\n"));
    assert!(!csv.contains('\r'));
}

#[test]
fn hysteresis_writes_one_file_per_frequency() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 8\nhysteresis.samples_per_period = 200\n",
    );
    let out_dir = dir.path().join("out");
    let out = llstab(&[
        "hysteresis",
        "--config",
        &cfg,
        "--omega",
        "4,2,1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for w in ["4", "2", "1"] {
        assert!(out_dir.join(format!("hysteresis_{w}.csv")).exists());
    }
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("areas increase as omega decreases: yes"),
        "{stdout}"
    );

    let bundle = read_results(&out_dir).unwrap();
    assert_eq!(bundle.hysteresis.len(), 3);
    assert!(
        bundle
            .hysteresis
            .windows(2)
            .all(|w| w[1].loop_area > w[0].loop_area)
    );
    let loops = fs::read_to_string(out_dir.join("loops.csv")).unwrap();
    assert_eq!(loops.lines().count(), 1 + 3 * 201);
}

#[test]
fn sweep_covers_three_panels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.n = 4\nhysteresis.samples_per_period = 50\n",
    );
    let out_dir = dir.path().join("out");
    let out = llstab(&[
        "sweep",
        "--quiet",
        "--config",
        &cfg,
        "--omega",
        "2,1",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let files = fs::read_dir(&out_dir).unwrap().count();
    assert_eq!(files, 3 + 6 + 1);
    assert!(out_dir.join("hysteresis_m3_2.csv").exists());
}
