use thiserror::Error;

use crate::scattering::Channel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("laser-atom detuning and atomic linewidth are both zero; the dispersive shift is undefined")]
    DegenerateDetuning,

    #[error("resonance solver did not converge after {iterations} iterations (last step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("wavefunction leaks to the grid edge (relative edge amplitude {leak:e})")]
    GridTooNarrow { leak: f64 },

    #[error("wavefunction is not normalized (norm² = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("{channel} probability {probability:e} is too small to condition on")]
    ZeroProbability { channel: Channel, probability: f64 },

    #[error("Fock truncation exceeded at t = {time}: population of the top level is {population:e}")]
    TruncationExceeded { time: f64, population: f64 },

    #[error("integrator step size underflow at t = {time} (dt = {dt:e})")]
    StepSizeUnderflow { time: f64, dt: f64 },

    #[error("eigenvector {index} has vanishing bilinear norm {norm:e} (exceptional point)")]
    DegenerateEigenvector { index: usize, norm: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
