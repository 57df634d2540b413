use std::path::PathBuf;
use std::process::ExitCode;

use cavom_cli::{list_presets, output_dir, run_experiment, CliError, ExperimentConfig, ExperimentId};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cavom", version, about = "Single-atom cavity optomechanics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its datasets.
    Run {
        /// fig2, fig3a, fig3b, fig4c, fig5, fig6, fig9, fig10, fig11 or custom-sweep.
        experiment: Option<String>,
        /// Start from this config file instead of the built-in default.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Base parameter set (see `cavom presets`).
        #[arg(long)]
        preset: Option<String>,
        /// Override a parameter, option or sweep bound, e.g. `omega_m=0.1`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (default `$CAVOM_OUT/<experiment>` or `out/<experiment>`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the built-in parameter sets.
    Presets,
    /// Check a config file without running it.
    Validate { config: PathBuf },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Presets => print!("{}", list_presets()),
        Command::Validate { config } => {
            let config = load(&config)?;
            config.validate()?;
            println!(
                "ok: {} with {} sweep points over `{}`",
                config.experiment, config.sweep.points, config.sweep.variable
            );
        }
        Command::Run {
            experiment,
            config,
            preset,
            set,
            out,
            workers,
        } => {
            let mut config = match (config, experiment) {
                (Some(path), experiment) => {
                    let config = load(&path)?;
                    if let Some(name) = experiment {
                        if name != config.experiment {
                            return Err(CliError::Config(format!(
                                "{} holds a `{}` config, not `{name}`",
                                path.display(),
                                config.experiment
                            )));
                        }
                    }
                    config
                }
                (None, Some(name)) => ExperimentConfig::default_for(ExperimentId::parse(&name)?),
                (None, None) => {
                    return Err(CliError::Config(
                        "name an experiment or pass --config".into(),
                    ))
                }
            };
            if let Some(preset) = preset {
                config.params = None;
                config.preset = Some(preset);
            }
            for assignment in &set {
                config.apply_override(assignment)?;
            }
            if out.is_some() {
                config.output = out;
            }
            if workers.is_some() {
                config.workers = workers;
            }
            let manifest = run_experiment(&config)?;
            let dir = output_dir(&config);
            println!(
                "{} finished in {:.2} s with {} workers",
                manifest.experiment, manifest.runtime_seconds, manifest.workers
            );
            for file in &manifest.files {
                println!("  {}", dir.join(&file.name).display());
            }
            println!("  {}", dir.join("manifest.json").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
