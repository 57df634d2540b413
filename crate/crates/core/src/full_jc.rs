//! Exact single-photon scattering from the Jaynes–Cummings model with
//! atomic motion, restricted to the single-excitation subspace.
//!
//! Basis ordering: `|g,1,n⟩` at index `n` and `|e,0,n⟩` at index `N + n`
//! for `n < N`. With decay folded in, the Hamiltonian is complex symmetric,
//! so eigenvectors are normalized with the unconjugated product
//! `⟨β*|β⟩ = Σ_i v_i² = 1` and the resolvent is `Σ_β |β⟩⟨β*| / λ_β`.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    resonant_drive_at_atom_detuning, solve_resonant_drive, DriveFrequency, SystemParams,
};
use crate::motional::{ground_state, PositionGrid};
use crate::model::DerivedQuantities;
use crate::quadrature::TrapPositionBasis;
use crate::scattering::{scatter_photon, Channel};

/// Default phonon cutoff.
pub const DEFAULT_PHONON_CUTOFF: usize = 64;

type CMat = Mat<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingleExcitationBasis {
    pub cutoff: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Atom in the ground state, one cavity photon.
    Photon,
    /// Atom excited, cavity empty.
    Excited,
}

impl SingleExcitationBasis {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParams("phonon cutoff must be positive".into()));
        }
        Ok(Self { cutoff })
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoff
    }

    pub fn index(&self, sector: Sector, n: usize) -> usize {
        assert!(n < self.cutoff);
        match sector {
            Sector::Photon => n,
            Sector::Excited => self.cutoff + n,
        }
    }

    pub fn state(&self, index: usize) -> (Sector, usize) {
        assert!(index < self.dim());
        if index < self.cutoff {
            (Sector::Photon, index)
        } else {
            (Sector::Excited, index - self.cutoff)
        }
    }
}

/// Single-excitation Hamiltonian in the frame of the drive.
///
/// The atom–cavity coupling is linearized around the trap centre:
/// `g(x) ≈ g0 [cos x_0 − sin x_0 · η_LD (b + b†)]`.
pub fn build_hamiltonian(
    params: &SystemParams,
    drive: &DriveFrequency,
    cutoff: usize,
) -> Result<CMat> {
    params.validate()?;
    let basis = SingleExcitationBasis::new(cutoff)?;
    let eta = params.eta_ld();
    let delta_0 = drive.delta_0(params);
    let photon = Complex64::new(-drive.delta_c, -0.5 * params.kappa());
    let excited = Complex64::new(-delta_0, -0.5 * params.gamma);
    let on_site = params.g0 * params.x0.cos();
    let slope = -params.g0 * params.x0.sin() * eta;

    let mut h = CMat::zeros(basis.dim(), basis.dim());
    for n in 0..cutoff {
        let phonons = params.omega_m * n as f64;
        let p = basis.index(Sector::Photon, n);
        let e = basis.index(Sector::Excited, n);
        h[(p, p)] = photon + phonons;
        h[(e, e)] = excited + phonons;
        h[(p, e)] = on_site.into();
        h[(e, p)] = on_site.into();
        if n + 1 < cutoff {
            let g = Complex64::from(slope * ((n + 1) as f64).sqrt());
            let e_up = basis.index(Sector::Excited, n + 1);
            let p_up = basis.index(Sector::Photon, n + 1);
            h[(p, e_up)] = g;
            h[(e_up, p)] = g;
            h[(p_up, e)] = g;
            h[(e, p_up)] = g;
        }
    }
    Ok(h)
}

/// Eigen-decomposition of a complex-symmetric single-excitation Hamiltonian.
#[derive(Debug, Clone)]
pub struct FullModelDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as columns, normalized by `Σ_i v_i² = 1`.
    pub eigenvectors: CMat,
    /// Drive detuning `δ_c` at which the Hamiltonian was built.
    pub reference_delta_c: f64,
}

/// Relative size of `Σ v_i²` against `Σ |v_i|²` below which an eigenvector
/// is treated as self-orthogonal.
const EXCEPTIONAL_POINT_TOLERANCE: f64 = 1e-10;

/// Diagonalizes `h` built at drive `reference`.
pub fn decompose(h: &CMat, reference: &DriveFrequency) -> Result<FullModelDecomposition> {
    let dim = h.nrows();
    let evd = h.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    let vectors = evd.U();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });

    let mut eigenvectors = CMat::zeros(dim, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    for (col, &k) in order.iter().enumerate() {
        let bilinear: Complex64 = (0..dim).map(|i| vectors[(i, k)] * vectors[(i, k)]).sum();
        let norm_sqr: f64 = (0..dim).map(|i| vectors[(i, k)].norm_sqr()).sum();
        if bilinear.norm() <= EXCEPTIONAL_POINT_TOLERANCE * norm_sqr {
            return Err(Error::DegenerateEigenvector {
                index: col,
                norm: bilinear.norm() / norm_sqr,
            });
        }
        let scale = bilinear.sqrt().inv();
        for i in 0..dim {
            eigenvectors[(i, col)] = vectors[(i, k)] * scale;
        }
        eigenvalues.push(values[k]);
    }
    Ok(FullModelDecomposition {
        eigenvalues,
        eigenvectors,
        reference_delta_c: reference.delta_c,
    })
}

impl FullModelDecomposition {
    pub fn new(params: &SystemParams, drive: &DriveFrequency, cutoff: usize) -> Result<Self> {
        decompose(&build_hamiltonian(params, drive, cutoff)?, drive)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn cutoff(&self) -> usize {
        self.dim() / 2
    }

    /// Largest `‖H v_β − λ_β v_β‖ / ‖H‖` over all pairs (Frobenius norms).
    pub fn residual(&self, h: &CMat) -> f64 {
        let h_norm = h.norm_l2().max(f64::MIN_POSITIVE);
        let hv = h * &self.eigenvectors;
        (0..self.dim())
            .map(|b| {
                let lambda = self.eigenvalues[b];
                (0..self.dim())
                    .map(|i| (hv[(i, b)] - lambda * self.eigenvectors[(i, b)]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
                    / h_norm
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `Σ_β |β⟩⟨β*| − 1`.
    pub fn completeness_defect(&self) -> f64 {
        let v = &self.eigenvectors;
        let outer = v * v.transpose();
        let mut worst = 0.0_f64;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((outer[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `H(δ_c)⁻¹ |g,1,0⟩`, reusing the decomposition through
    /// `λ_β(δ_c) = λ_β(ref) − (δ_c − δ_c^ref)`.
    pub fn resolvent_column(&self, delta_c: f64) -> Vec<Complex64> {
        let shift = delta_c - self.reference_delta_c;
        let dim = self.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for b in 0..dim {
            let weight = self.eigenvectors[(0, b)] / (self.eigenvalues[b] - shift);
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.eigenvectors[(i, b)] * weight;
            }
        }
        out
    }

    /// Writes `re_lambda,im_lambda` rows.
    pub fn write_eigenvalues_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "re_lambda,im_lambda")?;
        for l in &self.eigenvalues {
            writeln!(out, "{:.12e},{:.12e}", l.re, l.im)?;
        }
        Ok(())
    }
}

/// Sideband-resolved scattering amplitudes `S_{c,n}`: the photon leaves in
/// channel `c` and the trap ends in Fock state `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullScattering {
    pub s_r: Vec<Complex64>,
    pub s_t: Vec<Complex64>,
    pub s_at: Vec<Complex64>,
    pub s_loss: Vec<Complex64>,
}

impl FullScattering {
    pub fn get(&self, channel: Channel) -> &[Complex64] {
        match channel {
            Channel::Reflection => &self.s_r,
            Channel::Transmission => &self.s_t,
            Channel::AtomicEmission => &self.s_at,
            Channel::IntrinsicLoss => &self.s_loss,
        }
    }

    pub fn probability(&self, channel: Channel) -> f64 {
        self.get(channel).iter().map(|s| s.norm_sqr()).sum()
    }

    pub fn total_probability(&self) -> f64 {
        Channel::ALL.iter().map(|&c| self.probability(c)).sum()
    }

    /// `Σ_n n |S_{c,n}|² / p_c`, or `None` for a closed channel.
    pub fn phonons(&self, channel: Channel) -> Option<f64> {
        let p = self.probability(channel);
        if p < crate::scattering::MIN_CHANNEL_PROBABILITY {
            return None;
        }
        let weighted: f64 = self
            .get(channel)
            .iter()
            .enumerate()
            .map(|(n, s)| n as f64 * s.norm_sqr())
            .sum();
        Some(weighted / p)
    }

    /// Normalized Fock-basis amplitudes of the motional state left behind
    /// after detection in `channel`.
    pub fn conditional_state(&self, channel: Channel) -> Option<Vec<Complex64>> {
        let p = self.probability(channel);
        if p < crate::scattering::MIN_CHANNEL_PROBABILITY {
            return None;
        }
        let scale = p.sqrt().recip();
        Some(self.get(channel).iter().map(|s| s * scale).collect())
    }
}

fn assemble(
    resolvent: &[Complex64],
    params: &SystemParams,
    cutoff: usize,
) -> Result<FullScattering> {
    let i = Complex64::i();
    let photon = &resolvent[..cutoff];
    let excited = &resolvent[cutoff..];
    let s_r = photon
        .iter()
        .enumerate()
        .map(|(n, g)| if n == 0 { 1.0 } else { 0.0 } + i * params.kappa_r * g)
        .collect();
    let t = (params.kappa_t * params.kappa_r).sqrt();
    let s_t = photon.iter().map(|g| i * t * g).collect();
    let l = (params.kappa_in * params.kappa_r).sqrt();
    let s_loss = photon.iter().map(|g| i * l * g).collect();

    // recoil exp(i x) acting on the motional part of the excited amplitude
    let recoil = TrapPositionBasis::new(cutoff, params.x0, params.eta_ld())?
        .operator(|x| Complex64::from_polar(1.0, x));
    let a = (params.gamma * params.kappa_r).sqrt();
    let s_at = (0..cutoff)
        .map(|n| {
            let kicked: Complex64 = (0..cutoff).map(|m| recoil[(n, m)] * excited[m]).sum();
            i * a * kicked
        })
        .collect();
    Ok(FullScattering {
        s_r,
        s_t,
        s_at,
        s_loss,
    })
}

/// Scattering amplitudes at drive `drive`, from a decomposition built at
/// any reference drive with the same `params`.
pub fn s_matrix_elements(
    decomposition: &FullModelDecomposition,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<FullScattering> {
    let resolvent = decomposition.resolvent_column(drive.delta_c);
    assemble(&resolvent, params, decomposition.cutoff())
}

/// Same amplitudes from a direct linear solve `H g = |g,1,0⟩`.
pub fn s_matrix_elements_direct(
    params: &SystemParams,
    drive: &DriveFrequency,
    cutoff: usize,
) -> Result<FullScattering> {
    let h = build_hamiltonian(params, drive, cutoff)?;
    let mut rhs = CMat::zeros(h.nrows(), 1);
    rhs[(0, 0)] = Complex64::new(1.0, 0.0);
    let g = h.partial_piv_lu().solve(&rhs);
    let resolvent: Vec<Complex64> = (0..h.nrows()).map(|i| g[(i, 0)]).collect();
    assemble(&resolvent, params, cutoff)
}

/// Channel observables compared across the two theories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub p_r: f64,
    pub p_t: f64,
    pub p_at: f64,
    pub n_r: f64,
}

impl ChannelSummary {
    fn from_full(s: &FullScattering) -> Self {
        Self {
            p_r: s.probability(Channel::Reflection),
            p_t: s.probability(Channel::Transmission),
            p_at: s.probability(Channel::AtomicEmission),
            n_r: s.phonons(Channel::Reflection).unwrap_or(f64::NAN),
        }
    }

    /// `|a − b| / |b|` per field, with `b` the exact value.
    pub fn relative_deviation(&self, exact: &Self) -> Self {
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        Self {
            p_r: rel(self.p_r, exact.p_r),
            p_t: rel(self.p_t, exact.p_t),
            p_at: rel(self.p_at, exact.p_at),
            n_r: rel(self.n_r, exact.n_r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityRow {
    pub ratio: f64,
    pub effective: ChannelSummary,
    pub full: ChannelSummary,
    /// `Σ_{c,n} |S_{c,n}|²` of the exact theory.
    pub full_total_probability: f64,
}

impl ValidityRow {
    pub const CSV_HEADER: &'static str =
        "ratio,p_r_eff,p_t_eff,p_at_eff,n_r_eff,p_r_full,p_t_full,p_at_full,n_r_full";

    pub fn csv_line(&self) -> String {
        let (e, f) = (&self.effective, &self.full);
        format!(
            "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.ratio, e.p_r, e.p_t, e.p_at, e.n_r, f.p_r, f.p_t, f.p_at, f.n_r
        )
    }

    pub fn deviation(&self) -> ChannelSummary {
        self.effective.relative_deviation(&self.full)
    }
}

/// Runs both theories for one parameter point with the atom in the trap
/// ground state at `params.x0`.
pub fn compare_theories(
    params: &SystemParams,
    drive: &DriveFrequency,
    cutoff: usize,
    ratio: f64,
) -> Result<ValidityRow> {
    let derived = DerivedQuantities::compute(params, drive)?;
    let grid = PositionGrid::auto(params.x0, derived.eta_ld, derived.resolution_r)?;
    let psi0 = ground_state(grid, params.x0, derived.eta_ld)?;
    let outcome = scatter_photon(&psi0, params, drive)?;
    let phonons = outcome.phonons()?;
    let effective = ChannelSummary {
        p_r: outcome.probabilities.reflection,
        p_t: outcome.probabilities.transmission,
        p_at: outcome.probabilities.atomic_emission,
        n_r: phonons.n_r.unwrap_or(f64::NAN),
    };

    let decomposition = FullModelDecomposition::new(params, drive, cutoff)?;
    let full = s_matrix_elements(&decomposition, params, drive)?;
    Ok(ValidityRow {
        ratio,
        effective,
        full: ChannelSummary::from_full(&full),
        full_total_probability: full.total_probability(),
    })
}

/// Varies `g0/|δ_0|` at fixed `g0` with a resonant photon at `x_0`;
/// `δ_0 = −g0/ratio` and `ω_0 − ω_c` follows from the resonance condition.
pub fn validity_sweep_detuning(
    params: &SystemParams,
    ratios: &[f64],
    cutoff: usize,
) -> Result<Vec<ValidityRow>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            if !(ratio > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "g0/|delta_0| must be positive, got {ratio}"
                )));
            }
            let (point, drive) = resonant_drive_at_atom_detuning(params, -params.g0 / ratio, params.x0)?;
            compare_theories(&point, &drive, cutoff, ratio)
        })
        .collect()
}

/// Varies `ω_m/κ` at fixed recoil frequency, so `η_LD` shrinks as the trap
/// stiffens; the drive is re-solved for resonance at `x_0` each time.
pub fn validity_sweep_sideband(
    params: &SystemParams,
    ratios: &[f64],
    cutoff: usize,
) -> Result<Vec<ValidityRow>> {
    ratios
        .par_iter()
        .map(|&ratio| {
            if !(ratio > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "omega_m/kappa must be positive, got {ratio}"
                )));
            }
            let mut point = *params;
            point.omega_m = ratio * params.kappa();
            let drive = solve_resonant_drive(&point, point.x0)?;
            compare_theories(&point, &drive, cutoff, ratio)
        })
        .collect()
}

/// Fiber parameter set II with the trap and mirror split used for the
/// detuning validity sweep: `η_LD = 0.2`, `ω_m = 2π × 0.2 MHz`.
pub fn detuning_sweep_params() -> SystemParams {
    let mut p = crate::model::Preset::FiberII.params();
    p.kappa_r = 2.8;
    p.kappa_t = 0.8;
    p.omega_m = 0.2;
    p.omega_rec = 0.2 * 0.2 * 0.2;
    p
}

/// Photonic-crystal cavity with the linewidth artificially reduced to
/// `κ = 2π × 20 MHz` (`κ_r = 4κ_t`) and the atom far detuned,
/// `ω_0 − ω_c = 100 g0`.
pub fn sideband_sweep_params() -> SystemParams {
    let mut p = crate::model::Preset::PhotonicCrystal.params();
    p.kappa_r = 16.0;
    p.kappa_t = 4.0;
    p.atom_cavity_detuning = 100.0 * p.g0;
    p
}
