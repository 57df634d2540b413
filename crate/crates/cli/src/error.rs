use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment `{0}` (known: fig2, fig3a, fig3b, fig4c, fig5, fig6, fig9, fig10, fig11, custom-sweep)")]
    UnknownExperiment(String),

    #[error("invalid sweep range: {0}")]
    InvalidRange(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot write output to {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("computation failed at {point}: {source}")]
    Compute {
        point: String,
        source: cavom::Error,
    },
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for compute failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
