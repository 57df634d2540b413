//! Experiment runner behind the `cavom` binary: loads configs, evaluates
//! sweeps on a bounded worker pool and writes CSV/JSON datasets with a
//! manifest.

pub mod config;
pub mod error;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cavom::model::{solve_resonant_drive, zero_point_resolution, Preset};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, ExperimentId, Scale, SweepRange, CONFIG_VERSION};
pub use error::{CliError, Result};
pub use experiments::{compute, OutputFile};

/// Environment variable naming the output root; each experiment writes to
/// a subdirectory named after it.
pub const OUTPUT_ENV: &str = "CAVOM_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub config_version: u32,
    pub inputs_sha256: String,
    pub workers: usize,
    pub runtime_seconds: f64,
    pub config: ExperimentConfig,
    pub files: Vec<ManifestEntry>,
}

/// Output directory: the config's own, else `$CAVOM_OUT/<experiment>`,
/// else `out/<experiment>`.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &config.output {
        return dir.clone();
    }
    let root = std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"));
    root.join(&config.experiment)
}

/// Runs the experiment and writes its files plus `manifest.json`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Manifest> {
    config.validate()?;
    // keep dense linear algebra single-threaded inside each sweep point so
    // results cannot depend on how many workers share the machine
    faer::set_global_parallelism(faer::Par::Seq);

    let workers = config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;

    let dir = output_dir(config);
    fs::create_dir_all(&dir).map_err(|source| CliError::Output {
        path: dir.clone(),
        source,
    })?;

    let start = Instant::now();
    let files = pool.install(|| compute(config))?;
    let runtime_seconds = start.elapsed().as_secs_f64();

    let mut entries = Vec::with_capacity(files.len());
    for file in &files {
        write(&dir.join(&file.name), &file.contents)?;
        entries.push(ManifestEntry {
            name: file.name.clone(),
            sha256: config::hex(&Sha256::digest(file.contents.as_bytes())),
            rows: file.rows,
        });
    }
    let manifest = Manifest {
        experiment: config.experiment.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_version: config.version,
        inputs_sha256: config.inputs_hash(),
        workers,
        runtime_seconds,
        config: config.clone(),
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write(&dir.join("manifest.json"), &text)?;
    Ok(manifest)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Frequency in units of 2π × MHz, printed with a readable prefix.
fn format_frequency(value: f64) -> String {
    let magnitude = value.abs();
    if magnitude >= 1000.0 {
        format!("2π×{} GHz", trim(value / 1000.0))
    } else if magnitude >= 1.0 || magnitude == 0.0 {
        format!("2π×{} MHz", trim(value))
    } else {
        format!("2π×{} kHz", trim(value * 1000.0))
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Human-readable table of the built-in parameter sets, with the
/// zero-point resolution each reaches at a resonant drive.
pub fn list_presets() -> String {
    let mut out = String::new();
    for preset in Preset::ALL {
        let p = preset.params();
        let r_zp = solve_resonant_drive(&p, p.x0)
            .and_then(|drive| zero_point_resolution(&p, &drive))
            .map_or_else(|e| format!("n/a ({e})"), |r| format!("{r:.3}"));
        out.push_str(&format!("{}\n  {}\n", preset.name(), preset.description()));
        for (label, value) in [
            ("g0", p.g0),
            ("kappa", p.kappa()),
            ("kappa_r", p.kappa_r),
            ("kappa_t", p.kappa_t),
            ("gamma", p.gamma),
            ("omega_rec", p.omega_rec),
            ("omega_m", p.omega_m),
            ("w0 - wc", p.atom_cavity_detuning),
        ] {
            out.push_str(&format!("  {label:<10} = {}\n", format_frequency(value)));
        }
        out.push_str(&format!(
            "  {:<10} = {:.4}\n  {:<10} = {r_zp}\n\n",
            "eta_LD",
            p.eta_ld(),
            "r_zp"
        ));
    }
    out
}
