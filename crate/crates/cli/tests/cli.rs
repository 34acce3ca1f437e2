//! End-to-end behavior of the `otto` binary: argument handling, config
//! validation, exit codes, and the numerics error path.

use std::path::Path;
use std::process::{Command, Output};

fn otto(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otto"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary spawns")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = otto(&["run", "--preset", "fig9"], dir.path());
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown preset"), "stderr: {stderr}");
    assert!(stderr.contains("\"kind\":\"config\""), "stderr: {stderr}");
}

#[test]
fn run_needs_a_preset_or_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = otto(&["run"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("need --preset and/or --config"));
}

#[test]
fn validate_flags_bad_values_with_paths() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{ "params": { "tau_us": -3.0 } }"#).unwrap();
    let out = otto(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("params.tau_us"), "stdout: {stdout}");
}

#[test]
fn validate_accepts_a_clean_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.json");
    std::fs::write(
        &cfg,
        r#"{ "sweep": { "axis": "none", "cycles": 2 }, "fock": { "n_max": 6, "guard_levels": 3 } }"#,
    )
    .unwrap();
    let out = otto(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn misspelled_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{ "params": { "tua_us": 50.0 } }"#).unwrap();
    let out = otto(&["validate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tua_us"));
}

#[test]
fn guard_leakage_aborts_with_a_numerics_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.json");
    // a 3-level battery cannot hold even one cycle of charging
    std::fs::write(
        &cfg,
        r#"{ "sweep": { "axis": "none", "cycles": 2 }, "fock": { "n_max": 2, "guard_levels": 1 } }"#,
    )
    .unwrap();
    let out = otto(
        &["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"kind\":\"numerics\""));
}

#[test]
fn list_presets_covers_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = otto(&["list-presets"], dir.path());
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in otto_cli::presets::PRESET_NAMES {
        assert!(stdout.contains(name), "missing {name} in: {stdout}");
    }
}

#[test]
fn run_reports_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = otto(
        &["run", "--preset", "figS3", "--out", out_dir.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("wrote"), "stdout: {stdout}");
    assert!(out_dir.join("manifest.json").is_file());
    assert!(out_dir.join("cd_waveform.csv").is_file());
}

#[test]
fn seed_flag_overrides_the_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("thermo.json");
    std::fs::write(
        &cfg,
        r#"{
            "sweep": { "axis": "none", "cycles": 0 },
            "thermometry": {
                "source": "thermal", "n_bar": 1.2,
                "shots_per_point": 50, "resamples": 20, "forced_cutoffs": []
            }
        }"#,
    )
    .unwrap();
    let run = |seed: &str, sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = otto(
            &[
                "run",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                seed,
                "--out",
                out_dir.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(out_dir.join("thermometry_scan.csv")).unwrap()
    };
    let a = run("1", "a");
    let b = run("2", "b");
    let a_again = run("1", "c");
    assert_eq!(a, a_again, "equal seeds must reproduce the scan");
    assert_ne!(a, b, "different seeds must resample the shots");
}
