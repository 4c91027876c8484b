use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dynlag-cli-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynlag"))
        .arg("run")
        .arg(config)
        .env("DYNLAG_OUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn run_text(name: &str, text: &str) -> (Output, PathBuf) {
    let dir = scratch(name);
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.join("out");
    (run(&cfg, &out), out)
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"))
}

fn summary(out: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(out.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn oscillator_config_gives_one_focal_row_at_pi() {
    let out = scratch("osc");
    let o = run(&bundled("oscillator_focal"), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("focal.csv")).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "time,multiplicity,kind");
    assert_eq!(rows.len(), 2, "{text}");
    let cells: Vec<&str> = rows[1].split(',').collect();
    assert!((cells[0].parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-8);
    assert_eq!(&cells[1..], &["1", "original"]);
}

#[test]
fn kepler_summary_reports_both_radial_curvatures() {
    let out = scratch("kepler");
    let o = run(&bundled("kepler_curvature"), &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    assert_eq!(s["schema_version"], 1);
    assert_eq!(s["references"]["radial_curvature"], -2.0);
    assert_eq!(s["references"]["reduced_radial_curvature"], 1.0);
    let c = &s["curvature"];
    assert!((c["curvature_form"][0][0].as_f64().unwrap() + 2.0).abs() < 1e-9);
    assert!((c["reduced_curvature_operator"][0][0].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(s["tolerances"]["integrator"], 1e-12);
    for entry in s["discrepancy_log"].as_array().unwrap() {
        assert!(entry["deviation"].as_f64().unwrap() < 1e-8, "{entry}");
    }
}

#[test]
fn empty_focal_list_writes_header_only() {
    let (o, out) = run_text(
        "empty",
        "outputs = [\"focal\"]\ninitial_state = [0.0, 1.0]\n[model]\nname = \"oscillator\"\n[window]\nt_max = 1.0\n",
    );
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(out.join("focal.csv")).unwrap(), "time,multiplicity,kind\n");
    assert_eq!(summary(&out)["counts"]["original"], 0);
}

#[test]
fn malformed_window_exits_2() {
    let (o, _) = run_text(
        "window",
        "outputs = [\"focal\"]\ninitial_state = [0.0, 1.0]\n[model]\nname = \"oscillator\"\n[window]\nt_max = -1.0\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let (o, _) = run_text("syntax", "outputs = [\"focal\"\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_model_and_domain_errors_exit_3() {
    let (o, _) = run_text("unknown", "outputs = [\"curvature\"]\ninitial_state = [0.0, 1.0]\n[model]\nname = \"pendulum\"\n");
    assert_eq!(o.status.code(), Some(3));
    let (o, _) = run_text(
        "domain",
        "outputs = [\"curvature\"]\ninitial_state = [0.0, 1.0, -1.0, 0.0]\n[model]\nname = \"kepler\"\n",
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kepler"));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = scratch("unwritable");
    let blocker = dir.join("file");
    std::fs::write(&blocker, "not a directory").unwrap();
    let o = run(&bundled("kepler_curvature"), &blocker.join("out"));
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn degenerate_reduction_exits_4_with_module() {
    // Rotation about the origin of a 2-dof oscillator at q = 0: g⃗ has no
    // vertical-dual component, so the reduction is degenerate.
    let (o, _) = run_text(
        "degenerate",
        "outputs = [\"reduced-curvature\"]\ninitial_state = [1.0, 0.5, 0.0, 0.0]\nintegrals = [\"angular_momentum\"]\n[model]\nname = \"oscillator\"\nfrequencies = [1.0, 1.0]\n",
    );
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("integral_reduction"));
}

#[test]
fn models_list_names_every_model() {
    let o = Command::new(env!("CARGO_BIN_EXE_dynlag")).args(["models", "list"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["oscillator", "natural", "kepler", "nbody", "eight", "sphere"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let cfg = bundled("kepler_curvature");
    assert!(run(&cfg, &a).status.success());
    assert!(run(&cfg, &b).status.success());
    assert_eq!(dynlag::compare_outputs(&a, &b).unwrap(), None);
}
