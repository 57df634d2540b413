use std::fs;
use std::path::Path;
use std::process::Command;

use cavom_cli::{run_experiment, CliError, ExperimentConfig, ExperimentId, Manifest};

fn config(id: ExperimentId, points: usize, out: &Path, workers: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::default_for(id);
    config.sweep.points = points;
    config.output = Some(out.to_path_buf());
    config.workers = Some(workers);
    config
}

fn csv_bytes(dir: &Path, manifest: &Manifest) -> Vec<(String, Vec<u8>)> {
    manifest
        .files
        .iter()
        .map(|f| (f.name.clone(), fs::read(dir.join(&f.name)).unwrap()))
        .collect()
}

#[test]
fn worker_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    for (id, points) in [
        (ExperimentId::Fig4c, 16),
        (ExperimentId::Fig9, 6),
        (ExperimentId::Fig5, 24),
    ] {
        let one = tmp.path().join(format!("{id}-1"));
        let many = tmp.path().join(format!("{id}-4"));
        let a = run_experiment(&config(id, points, &one, 1)).unwrap();
        let b = run_experiment(&config(id, points, &many, 4)).unwrap();
        assert_eq!(a.inputs_sha256, b.inputs_sha256);
        assert_eq!(csv_bytes(&one, &a), csv_bytes(&many, &b), "{id}");
        assert_eq!(a.files, b.files);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(ExperimentId::Fig6, 12, tmp.path(), 2);
    let first = run_experiment(&cfg).unwrap();
    let bytes = csv_bytes(tmp.path(), &first);
    let second = run_experiment(&cfg).unwrap();
    assert_eq!(bytes, csv_bytes(tmp.path(), &second));
}

#[test]
fn row_counts_match_the_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    for id in ExperimentId::ALL {
        let points = if id == ExperimentId::Fig2 { 64 } else { 5 };
        let dir = tmp.path().join(id.name());
        let manifest = run_experiment(&config(id, points, &dir, 2))
            .unwrap_or_else(|e| panic!("{id}: {e}"));
        assert!(!manifest.files.is_empty());
        for file in &manifest.files {
            let text = fs::read_to_string(dir.join(&file.name)).unwrap();
            if file.name.ends_with(".csv") {
                assert_eq!(file.rows, Some(points), "{id}/{}", file.name);
                assert_eq!(text.lines().count(), points + 1, "{id}/{}", file.name);
            } else {
                serde_json::from_str::<serde_json::Value>(&text).unwrap();
            }
        }
        let written: Manifest =
            serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
        assert_eq!(written.files, manifest.files);
    }
}

#[test]
fn resolution_curve_has_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&config(ExperimentId::Fig4c, 20, tmp.path(), 2)).unwrap();
    let text = fs::read_to_string(tmp.path().join("fig4c.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r_zp,p_r,p_t"));
    let p_r: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(p_r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn scaling_fits_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    run_experiment(&config(ExperimentId::Fig6, 45, tmp.path(), 4)).unwrap();
    let header = fs::read_to_string(tmp.path().join("fig6.csv")).unwrap();
    assert!(header.starts_with("r_zp,n_r,n_t,n_total\n"));
    let fits: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("fig6_fits.json")).unwrap())
            .unwrap();
    let slope = |name: &str| fits[name]["slope"].as_f64().unwrap();
    assert!((slope("n_total_small") - 2.0).abs() < 0.05);
    assert!((slope("n_r_large") - 1.0).abs() < 0.15);
    assert!(fits["n_t"]["samples"].as_u64().unwrap() >= 17);
}

#[test]
fn empty_range_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(ExperimentId::CustomSweep, 0, tmp.path(), 1);
    let err = run_experiment(&cfg).unwrap_err();
    assert!(matches!(err, CliError::InvalidRange(_)), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn unknown_experiment_is_rejected() {
    assert!(matches!(
        ExperimentId::parse("fig7"),
        Err(CliError::UnknownExperiment(_))
    ));
    let mut cfg = ExperimentConfig::default_for(ExperimentId::Fig2);
    cfg.experiment = "fig7".into();
    assert!(matches!(cfg.validate(), Err(CliError::UnknownExperiment(_))));
}

fn cavom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavom"))
}

#[test]
fn binary_runs_with_env_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let status = cavom()
        .args(["run", "fig11", "--set", "sweep.points=4", "--workers", "2"])
        .env("CAVOM_OUT", tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["fig11_fiber-I.csv", "fig11_fiber-II.csv", "manifest.json"] {
        assert!(tmp.path().join("fig11").join(name).is_file(), "{name}");
    }
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| {
        cavom()
            .args(args)
            .env("CAVOM_OUT", tmp.path())
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(code(&["run", "fig7"]), Some(2));
    assert_eq!(code(&["run", "fig4c", "--set", "sweep.points=0"]), Some(2));
    assert_eq!(code(&["run", "fig6", "--preset", "fiber-I"]), Some(2));
    assert_eq!(
        code(&[
            "run",
            "custom-sweep",
            "--set",
            "sweep.start=-1",
            "--set",
            "sweep.stop=-0.5",
            "--config",
            &write_linear_gamma_sweep(tmp.path()),
        ]),
        Some(3)
    );
    assert_eq!(code(&["presets"]), Some(0));
}

fn write_linear_gamma_sweep(dir: &Path) -> String {
    let mut cfg = ExperimentConfig::default_for(ExperimentId::CustomSweep);
    cfg.sweep.variable = "gamma".into();
    cfg.sweep.scale = cavom_cli::Scale::Linear;
    cfg.sweep.points = 2;
    let path = dir.join("gamma.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    path.display().to_string()
}

#[test]
fn validate_verb_checks_config_files() {
    let tmp = tempfile::tempdir().unwrap();
    let good = tmp.path().join("good.json");
    fs::write(&good, ExperimentId::Fig9.default_config_text()).unwrap();
    let out = cavom().arg("validate").arg(&good).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: fig9"));

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"version": 1, "experiment": "fig9"}"#).unwrap();
    assert_eq!(cavom().arg("validate").arg(&bad).status().unwrap().code(), Some(2));
}

#[test]
fn presets_verb_lists_sources() {
    let out = cavom().arg("presets").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["photonic-crystal", "fiber-I", "fiber-II"] {
        assert!(text.contains(name));
    }
    assert!(text.contains("2π×41 MHz"));
    assert!(text.contains("2π×6.8 kHz"));
}
