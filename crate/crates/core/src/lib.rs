//! Single-atom cavity optomechanics: effective single-photon scattering
//! theory, motional master equations and the exact single-excitation
//! Jaynes–Cummings model with atomic motion.
//!
//! Conventions: ħ = 1, angular frequencies are plain numbers in units of
//! 2π × MHz and positions are the dimensionless phase `k_c x`.

pub mod dynamics;
pub mod error;
pub mod full_jc;
pub mod model;
pub mod motional;
pub mod quadrature;
pub mod scattering;

pub use error::{Error, Result};
pub use model::{
    solve_resonant_drive, CavityResponse, DerivedQuantities, DriveFrequency, Preset,
    ResonanceSolver, SystemParams,
};
pub use motional::{
    fock_decomposition, fock_overlap, fock_state, ground_state, phonon_expectation,
    MotionalWavefunction, PositionGrid,
};
pub use scattering::{
    added_phonons, channel_amplitudes, conditional_transmission, g2_statistics,
    heralded_phonon_state, reflection_spectrum, resolution_sweep, scatter_photon, Channel,
    ChannelAmplitudes, EffectiveSMatrix, ResolutionFamily, ScatteringOutcome, SweepRow,
};
pub use dynamics::{
    classical_potential, lindblad_generator, propagate, quantum_potential, ComplexPotential,
    Integrator, LindbladGenerator, MotionalDensityMatrix, Trajectory,
};
pub use full_jc::{
    build_hamiltonian, decompose, s_matrix_elements, validity_sweep_detuning,
    validity_sweep_sideband, FullModelDecomposition, FullScattering, ValidityRow,
};
