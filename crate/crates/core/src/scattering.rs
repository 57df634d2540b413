//! Single-photon scattering in the sideband-unresolved regime.
//!
//! The cavity responds instantaneously to the atomic position, so every
//! channel acts on the motional wave function as a multiplication operator
//! `S_c(x)`. With `D(x) = Δ_c(x) + iκ(x)/2`:
//!
//! ```text
//! S_r   = 1 − iκ_r / D
//! S_t   = −i√(κ_t κ_r) / D
//! S_in  = −i√(κ_in κ_r) / D
//! S_at  = √(g0²/(δ_0² + γ²/4)) · i√(γ κ_r) / D · u(x) e^{ix}
//! ```

use std::f64::consts::FRAC_PI_4;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    mode_profile, resonant_drive_at_atom_detuning, CavityResponse, DriveFrequency, SystemParams,
};
use crate::motional::{
    fock_overlap, ground_state, phonon_expectation, MotionalWavefunction, PositionGrid,
};

/// Probability below which a channel is treated as closed.
pub const MIN_CHANNEL_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Reflection,
    Transmission,
    AtomicEmission,
    IntrinsicLoss,
}

impl Channel {
    pub const ALL: [Channel; 4] = [
        Channel::Reflection,
        Channel::Transmission,
        Channel::AtomicEmission,
        Channel::IntrinsicLoss,
    ];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Reflection => "reflection",
            Channel::Transmission => "transmission",
            Channel::AtomicEmission => "atomic emission",
            Channel::IntrinsicLoss => "intrinsic loss",
        })
    }
}

/// The four scattering amplitudes at one atomic position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalAmplitudes {
    pub reflection: Complex64,
    pub transmission: Complex64,
    pub atomic_emission: Complex64,
    pub intrinsic_loss: Complex64,
}

impl LocalAmplitudes {
    pub fn get(&self, channel: Channel) -> Complex64 {
        match channel {
            Channel::Reflection => self.reflection,
            Channel::Transmission => self.transmission,
            Channel::AtomicEmission => self.atomic_emission,
            Channel::IntrinsicLoss => self.intrinsic_loss,
        }
    }

    pub fn total_probability(&self) -> f64 {
        Channel::ALL.iter().map(|&c| self.get(c).norm_sqr()).sum()
    }
}

/// Position-dependent effective S-matrix for a fixed parameter point.
#[derive(Debug, Clone, Copy)]
pub struct EffectiveSMatrix {
    pub response: CavityResponse,
    sqrt_kr_kt: f64,
    sqrt_kr_kin: f64,
    kappa_r: f64,
    atomic_prefactor: f64,
}

impl EffectiveSMatrix {
    pub fn new(params: &SystemParams, drive: &DriveFrequency) -> Result<Self> {
        let response = CavityResponse::new(params, drive)?;
        // emission_rate = γ g0²/(δ_0²+γ²/4), so its square root times √κ_r
        // is the atomic prefactor
        let atomic_prefactor = (response.emission_rate * params.kappa_r).sqrt();
        Ok(Self {
            response,
            sqrt_kr_kt: (params.kappa_r * params.kappa_t).sqrt(),
            sqrt_kr_kin: (params.kappa_r * params.kappa_in).sqrt(),
            kappa_r: params.kappa_r,
            atomic_prefactor,
        })
    }

    /// `D(x) = Δ_c(x) + iκ(x)/2`.
    pub fn denominator(&self, x: f64) -> Complex64 {
        Complex64::new(self.response.detuning(x), 0.5 * self.response.linewidth(x))
    }

    pub fn at(&self, x: f64) -> LocalAmplitudes {
        let inv = self.denominator(x).inv();
        let i = Complex64::i();
        let recoil = Complex64::from_polar(mode_profile(x), x);
        LocalAmplitudes {
            reflection: 1.0 - i * self.kappa_r * inv,
            transmission: -i * self.sqrt_kr_kt * inv,
            atomic_emission: i * self.atomic_prefactor * inv * recoil,
            intrinsic_loss: -i * self.sqrt_kr_kin * inv,
        }
    }
}

/// Channel amplitudes sampled on a position grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelAmplitudes {
    pub grid: PositionGrid,
    pub s_r: Vec<Complex64>,
    pub s_t: Vec<Complex64>,
    pub s_at: Vec<Complex64>,
    pub s_loss: Vec<Complex64>,
}

impl ChannelAmplitudes {
    pub fn get(&self, channel: Channel) -> &[Complex64] {
        match channel {
            Channel::Reflection => &self.s_r,
            Channel::Transmission => &self.s_t,
            Channel::AtomicEmission => &self.s_at,
            Channel::IntrinsicLoss => &self.s_loss,
        }
    }

    /// Largest pointwise deviation of `Σ_c |S_c|²` from one.
    pub fn completeness_defect(&self) -> f64 {
        (0..self.s_r.len())
            .map(|j| {
                let total = self.s_r[j].norm_sqr()
                    + self.s_t[j].norm_sqr()
                    + self.s_at[j].norm_sqr()
                    + self.s_loss[j].norm_sqr();
                (total - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn channel_amplitudes(
    params: &SystemParams,
    drive: &DriveFrequency,
    grid: &PositionGrid,
) -> Result<ChannelAmplitudes> {
    let s = EffectiveSMatrix::new(params, drive)?;
    let n = grid.len();
    let mut out = ChannelAmplitudes {
        grid: *grid,
        s_r: Vec::with_capacity(n),
        s_t: Vec::with_capacity(n),
        s_at: Vec::with_capacity(n),
        s_loss: Vec::with_capacity(n),
    };
    for x in grid.points() {
        let a = s.at(x);
        out.s_r.push(a.reflection);
        out.s_t.push(a.transmission);
        out.s_at.push(a.atomic_emission);
        out.s_loss.push(a.intrinsic_loss);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelProbabilities {
    pub reflection: f64,
    pub transmission: f64,
    pub atomic_emission: f64,
    pub intrinsic_loss: f64,
}

impl ChannelProbabilities {
    pub fn get(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Reflection => self.reflection,
            Channel::Transmission => self.transmission,
            Channel::AtomicEmission => self.atomic_emission,
            Channel::IntrinsicLoss => self.intrinsic_loss,
        }
    }

    pub fn total(&self) -> f64 {
        self.reflection + self.transmission + self.atomic_emission + self.intrinsic_loss
    }
}

/// Output of one photon scattering off the atom in motional state `input`.
#[derive(Debug, Clone)]
pub struct ScatteringOutcome {
    pub input: MotionalWavefunction,
    pub amplitudes: ChannelAmplitudes,
    pub probabilities: ChannelProbabilities,
    conditional: [Option<MotionalWavefunction>; 4],
}

impl ScatteringOutcome {
    /// Normalized motional state given detection in `channel`, or `None`
    /// when the channel is closed.
    pub fn conditional_state(&self, channel: Channel) -> Option<&MotionalWavefunction> {
        self.conditional[channel.index()].as_ref()
    }

    pub fn require_state(&self, channel: Channel) -> Result<&MotionalWavefunction> {
        self.conditional_state(channel)
            .ok_or(Error::ZeroProbability {
                channel,
                probability: self.probabilities.get(channel),
            })
    }

    /// `∫ w(|S_a|², |S_b|²) |Ψ_0|² dx`.
    fn weighted_moment(&self, a: Channel, b: Channel) -> f64 {
        let dx = self.input.grid.spacing();
        self.amplitudes
            .get(a)
            .iter()
            .zip(self.amplitudes.get(b))
            .zip(&self.input.amplitudes)
            .map(|((sa, sb), psi)| sa.norm_sqr() * sb.norm_sqr() * psi.norm_sqr())
            .sum::<f64>()
            * dx
    }

    fn open_probability(&self, channel: Channel) -> Result<f64> {
        let probability = self.probabilities.get(channel);
        if probability < MIN_CHANNEL_PROBABILITY {
            return Err(Error::ZeroProbability {
                channel,
                probability,
            });
        }
        Ok(probability)
    }
}

pub fn scatter_photon(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<ScatteringOutcome> {
    psi0.ensure_normalized()?;
    let amplitudes = channel_amplitudes(params, drive, &psi0.grid)?;
    let mut probs = [0.0; 4];
    let mut conditional: [Option<MotionalWavefunction>; 4] = Default::default();
    for channel in Channel::ALL {
        let branch = psi0.multiplied(amplitudes.get(channel));
        let p = branch.norm_sqr();
        probs[channel.index()] = p;
        if p >= MIN_CHANNEL_PROBABILITY {
            conditional[channel.index()] = Some(branch.normalized()?);
        }
    }
    Ok(ScatteringOutcome {
        input: psi0.clone(),
        amplitudes,
        probabilities: ChannelProbabilities {
            reflection: probs[0],
            transmission: probs[1],
            atomic_emission: probs[2],
            intrinsic_loss: probs[3],
        },
        conditional,
    })
}

/// Reflection probability `p_r(δ_c)` for each drive detuning, in input order.
pub fn reflection_spectrum(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    delta_c_sweep: &[f64],
) -> Result<Vec<(f64, f64)>> {
    psi0.ensure_normalized()?;
    let dx = psi0.grid.spacing();
    let density = psi0.density();
    delta_c_sweep
        .par_iter()
        .map(|&delta_c| {
            let s = EffectiveSMatrix::new(params, &DriveFrequency::new(delta_c))?;
            let p_r = psi0
                .grid
                .points()
                .zip(&density)
                .map(|(x, rho)| s.at(x).reflection.norm_sqr() * rho)
                .sum::<f64>()
                * dx;
            Ok((delta_c, p_r))
        })
        .collect()
}

/// Conditional state after a reflection and its overlap with the
/// single-phonon Fock state.
pub fn heralded_phonon_state(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<(MotionalWavefunction, f64)> {
    let outcome = scatter_photon(psi0, params, drive)?;
    let state = outcome.require_state(Channel::Reflection)?.clone();
    let fidelity = fock_overlap(&state, 1)?.norm_sqr();
    Ok((state, fidelity))
}

/// `p(t|t) = ∫|S_t|⁴|Ψ_0|² / p_t`.
pub fn conditional_transmission(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<f64> {
    let outcome = scatter_photon(psi0, params, drive)?;
    let p_t = outcome.open_probability(Channel::Transmission)?;
    Ok(outcome.weighted_moment(Channel::Transmission, Channel::Transmission) / p_t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G2Statistics {
    pub g2_tt: f64,
    pub g2_rt: f64,
}

impl ScatteringOutcome {
    pub fn g2(&self) -> Result<G2Statistics> {
        let p_t = self.open_probability(Channel::Transmission)?;
        let p_r = self.open_probability(Channel::Reflection)?;
        Ok(G2Statistics {
            g2_tt: self.weighted_moment(Channel::Transmission, Channel::Transmission) / (p_t * p_t),
            g2_rt: self.weighted_moment(Channel::Transmission, Channel::Reflection) / (p_t * p_r),
        })
    }

    /// Mean phonon number of each open channel's conditional state.
    pub fn phonons(&self) -> Result<AddedPhonons> {
        let mut per_channel = [None; 4];
        let mut total = 0.0;
        for channel in Channel::ALL {
            if let Some(state) = self.conditional_state(channel) {
                let n = phonon_expectation(state)?;
                per_channel[channel.index()] = Some(n);
                total += self.probabilities.get(channel) * n;
            }
        }
        Ok(AddedPhonons {
            n_r: per_channel[0],
            n_t: per_channel[1],
            n_at: per_channel[2],
            n_loss: per_channel[3],
            n_total: total,
        })
    }
}

pub fn g2_statistics(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<G2Statistics> {
    scatter_photon(psi0, params, drive)?.g2()
}

/// Conditional phonon numbers; `None` for closed channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AddedPhonons {
    pub n_r: Option<f64>,
    pub n_t: Option<f64>,
    pub n_at: Option<f64>,
    pub n_loss: Option<f64>,
    /// `Σ_c p_c n_c` over open channels.
    pub n_total: f64,
}

pub fn added_phonons(
    psi0: &MotionalWavefunction,
    params: &SystemParams,
    drive: &DriveFrequency,
) -> Result<AddedPhonons> {
    scatter_photon(psi0, params, drive)?.phonons()
}

/// Unwrapped `arg S_r(x)` on the grid.
pub fn phase_profile(
    params: &SystemParams,
    drive: &DriveFrequency,
    grid: &PositionGrid,
) -> Result<Vec<f64>> {
    let s = EffectiveSMatrix::new(params, drive)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut previous: Option<f64> = None;
    let mut offset = 0.0;
    for x in grid.points() {
        let raw = s.at(x).reflection.arg();
        if let Some(prev) = previous {
            let jump = raw + offset - prev;
            offset -= (jump / std::f64::consts::TAU).round() * std::f64::consts::TAU;
        }
        let value = raw + offset;
        out.push(value);
        previous = Some(value);
    }
    Ok(out)
}

/// One row of a scattering sweep, in the CSV layout of [`SweepRow::CSV_HEADER`].
///
/// Statistics of a closed channel are reported as NaN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_var: f64,
    pub p_r: f64,
    pub p_t: f64,
    pub p_at: f64,
    pub n_r: f64,
    pub n_t: f64,
    pub n_total: f64,
    pub g2_tt: f64,
    pub g2_rt: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "sweep_var,p_r,p_t,p_at,n_r,n_t,n_total,g2_tt,g2_rt";

    pub fn from_outcome(sweep_var: f64, outcome: &ScatteringOutcome) -> Result<Self> {
        let phonons = outcome.phonons()?;
        let g2 = outcome.g2().unwrap_or(G2Statistics {
            g2_tt: f64::NAN,
            g2_rt: f64::NAN,
        });
        let p = &outcome.probabilities;
        Ok(Self {
            sweep_var,
            p_r: p.reflection,
            p_t: p.transmission,
            p_at: p.atomic_emission,
            n_r: phonons.n_r.unwrap_or(f64::NAN),
            n_t: phonons.n_t.unwrap_or(f64::NAN),
            n_total: phonons.n_total,
            g2_tt: g2.g2_tt,
            g2_rt: g2.g2_rt,
        })
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.sweep_var,
            self.p_r,
            self.p_t,
            self.p_at,
            self.n_r,
            self.n_t,
            self.n_total,
            self.g2_tt,
            self.g2_rt
        )
    }
}

/// Lossless, critically coupled cavity with `γ = 0` whose zero-point
/// resolution is tuned through `g0` at fixed Lamb-Dicke parameter.
///
/// The atom sits at `x_0 = x_r = π/4` with `δ_0 = −2 g0`, so
/// `g_om = g0/2` and `r_zp = 2 g_om η_LD / κ` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionFamily {
    pub eta_ld: f64,
    pub kappa: f64,
}

impl ResolutionFamily {
    pub fn new(eta_ld: f64) -> Self {
        Self { eta_ld, kappa: 1.0 }
    }

    pub fn point(&self, r_zp: f64) -> Result<(SystemParams, DriveFrequency)> {
        if !(r_zp > 0.0 && self.eta_ld > 0.0 && self.kappa > 0.0) {
            return Err(Error::InvalidParams(format!(
                "resolution family needs positive r_zp, eta_ld and kappa (got {r_zp}, {}, {})",
                self.eta_ld, self.kappa
            )));
        }
        let g_om = r_zp * self.kappa / (2.0 * self.eta_ld);
        let g0 = 2.0 * g_om;
        let omega_m = self.kappa / 100.0;
        let base = SystemParams {
            g0,
            gamma: 0.0,
            kappa_r: 0.5 * self.kappa,
            kappa_t: 0.5 * self.kappa,
            kappa_in: 0.0,
            omega_m,
            omega_rec: self.eta_ld * self.eta_ld * omega_m,
            atom_cavity_detuning: 0.0,
            x0: FRAC_PI_4,
            drive_amplitude: 0.0,
        };
        resonant_drive_at_atom_detuning(&base, -2.0 * g0, FRAC_PI_4)
    }

    /// Ground state on an automatically sized grid for the point `r_zp`.
    pub fn ground_state(&self, r_zp: f64) -> Result<MotionalWavefunction> {
        let resolution = 2.0 * self.eta_ld / r_zp;
        let grid = PositionGrid::auto(FRAC_PI_4, self.eta_ld, resolution)?;
        ground_state(grid, FRAC_PI_4, self.eta_ld)
    }

    pub fn outcome(&self, r_zp: f64) -> Result<ScatteringOutcome> {
        let (params, drive) = self.point(r_zp)?;
        scatter_photon(&self.ground_state(r_zp)?, &params, &drive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionPoint {
    pub r_zp: f64,
    pub p_r: f64,
    pub p_t: f64,
}

pub fn resolution_sweep(
    family: &ResolutionFamily,
    r_zp_values: &[f64],
) -> Result<Vec<ResolutionPoint>> {
    r_zp_values
        .par_iter()
        .map(|&r_zp| {
            let outcome = family.outcome(r_zp)?;
            Ok(ResolutionPoint {
                r_zp,
                p_r: outcome.probabilities.reflection,
                p_t: outcome.probabilities.transmission,
            })
        })
        .collect()
}

/// `n` points spaced evenly in `log10` between `start` and `stop` inclusive.
pub fn log_space(start: f64, stop: f64, n: usize) -> Vec<f64> {
    assert!(start > 0.0 && stop > 0.0 && n >= 2);
    let (a, b) = (start.log10(), stop.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Least-squares slope and intercept of `log y` against `log x`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParams(
            "log-log fit needs two or more paired samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParams(
            "log-log fit needs strictly positive samples".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
