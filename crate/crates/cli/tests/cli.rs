use mechstate_cli::config::{parse_raw, resolve};
use mechstate_cli::run_pipeline;
use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mechstate"))
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn run_json(json: &str, dir: &Path) -> Value {
    let mut raw = parse_raw(json).unwrap();
    raw.out_dir = Some(dir.to_path_buf());
    raw.grid_n = Some(128);
    run_pipeline(&resolve(raw).unwrap()).unwrap();
    summary(dir)
}

#[test]
fn small_scale_is_negative() {
    let dir = tempfile::tempdir().unwrap();
    let s = run_json(r#"{"scenario": "small_scale"}"#, dir.path());
    assert!(s["wigner"]["min_w"].as_f64().unwrap() < 0.0);
    assert!(s["wigner"]["negative_volume"].as_f64().unwrap() > 0.0);
    for f in [
        "wigner.csv",
        "kernels.csv",
        "outcome_density.csv",
        "timing.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn uncoupled_photon_gives_a_gaussian() {
    for extra in [r#""decouple_photon": true"#, r#""optical_input": "vacuum""#] {
        let dir = tempfile::tempdir().unwrap();
        let s = run_json(
            &format!(r#"{{"scenario": "large_scale", {extra}}}"#),
            dir.path(),
        );
        assert_eq!(
            s["wigner"]["negative_volume"].as_f64().unwrap(),
            0.0,
            "{extra}"
        );
        assert!(s["wigner"]["min_w"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn wigner_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    run_json(r#"{"scenario": "small_scale"}"#, dir.path());
    let text = std::fs::read_to_string(dir.path().join("wigner.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[..3].iter().all(|l| l.starts_with("# ")));
    assert!(lines[1].contains("128 x 128"));
    assert!(lines[2].contains("ledger"));
    assert_eq!(lines[3], "X,P,W");
    assert_eq!(lines.len(), 4 + 128 * 128);
    let row: Vec<f64> = lines[4].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row.len(), 3);
}

#[test]
fn binary_runs_and_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let st = bin()
            .args([
                "--scenario",
                "small_scale",
                "--grid-n",
                "64",
                "--outcome",
                "sample",
                "--seed",
                "7",
            ])
            .arg("--out-dir")
            .arg(d.path())
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in [
        "wigner.csv",
        "summary.json",
        "outcome_density.csv",
        "kernels.csv",
    ] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
}

#[test]
fn explicit_z_flag() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args([
            "--scenario",
            "small_scale",
            "--grid-n",
            "64",
            "--z",
            "-0.5,1.25",
        ])
        .arg("--out-dir")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    let s = summary(dir.path());
    assert_eq!(s["outcome"]["outcome"]["z"][0].as_f64(), Some(-0.5));
    assert_eq!(s["outcome"]["outcome"]["z"][1].as_f64(), Some(1.25));
    assert_eq!(s["config"]["outcome"]["policy"], "explicit");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"scenario": "large_scale", "masss": 1}"#).unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("masss") && err.contains("pump_power"), "{err}");

    std::fs::write(&cfg, "{}").unwrap();
    let out = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda_opt"));

    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_run_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // eight points cannot hold the normalization
    let out = bin()
        .args(["--scenario", "small_scale", "--grid-n", "8"])
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(!dir.path().join("summary.json").exists());
    let partial: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("summary.json.partial")).unwrap(),
    )
    .unwrap();
    assert_eq!(partial["error"]["exit_code"], 4);
    assert!(partial["filters"]["det_v_c"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert!(dir.path().join("kernels.csv.partial").exists());
}
