//! Motion-only dynamics of the atom under a weak coherent drive.
//!
//! Eliminating the cavity leaves a master equation for the motional density
//! matrix in the Fock basis of the trap. Functions of position enter as
//! `f(x̂)` evaluated in the eigenbasis of the truncated position operator
//! (see [`TrapPositionBasis`]); products of such operators then stay exact
//! and the jump operators inherit pointwise unitarity of the S-matrix.

use std::io::Write;

use faer::Mat;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CavityResponse, DriveFrequency, SystemParams};
use crate::motional::PositionGrid;
use crate::quadrature::TrapPositionBasis;
use crate::scattering::{Channel, EffectiveSMatrix};

/// Default Fock truncation.
pub const DEFAULT_FOCK_DIM: usize = 64;

/// Largest tolerated population of the top Fock level.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

type CMat = Mat<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `V(x)` and the classical potential `U(x)` sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexPotential {
    #[serde(skip)]
    pub grid: PositionGrid,
    pub re_v: Vec<f64>,
    pub im_v: Vec<f64>,
    pub u_classical: Vec<f64>,
}

impl ComplexPotential {
    /// Writes `x,re_v,im_v,u_classical` rows.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,re_v,im_v,u_classical")?;
        for (j, x) in self.grid.points().enumerate() {
            writeln!(
                out,
                "{x:.12e},{:.12e},{:.12e},{:.12e}",
                self.re_v[j], self.im_v[j], self.u_classical[j]
            )?;
        }
        Ok(())
    }
}

/// Value of the complex potential at one position:
/// `Re V = κ_r E_0² Δ_c / |D|²`, `Im V = −κ(x) κ_r E_0² / (2|D|²)`.
fn potential_at(response: &CavityResponse, kappa_r: f64, e0_sq: f64, x: f64) -> Complex64 {
    let delta = response.detuning(x);
    let width = response.linewidth(x);
    let d2 = delta * delta + 0.25 * width * width;
    Complex64::new(kappa_r * e0_sq * delta / d2, -0.5 * width * kappa_r * e0_sq / d2)
}

fn classical_at(response: &CavityResponse, kappa_r: f64, e0_sq: f64, x: f64) -> f64 {
    -2.0 * (kappa_r / response.kappa) * e0_sq * (2.0 * response.detuning(x) / response.kappa).atan()
}

pub fn quantum_potential(
    params: &SystemParams,
    drive: &DriveFrequency,
    grid: &PositionGrid,
) -> Result<ComplexPotential> {
    let response = CavityResponse::new(params, drive)?;
    let e0_sq = params.drive_amplitude.powi(2);
    let mut out = ComplexPotential {
        grid: *grid,
        re_v: Vec::with_capacity(grid.len()),
        im_v: Vec::with_capacity(grid.len()),
        u_classical: Vec::with_capacity(grid.len()),
    };
    for x in grid.points() {
        let v = potential_at(&response, params.kappa_r, e0_sq, x);
        out.re_v.push(v.re);
        out.im_v.push(v.im);
        out.u_classical.push(classical_at(&response, params.kappa_r, e0_sq, x));
    }
    Ok(out)
}

/// `U(x) = −2 (κ_r/κ) E_0² arctan(2Δ_c(x)/κ)`.
pub fn classical_potential(
    params: &SystemParams,
    drive: &DriveFrequency,
    grid: &PositionGrid,
) -> Result<Vec<f64>> {
    let response = CavityResponse::new(params, drive)?;
    let e0_sq = params.drive_amplitude.powi(2);
    Ok(grid
        .points()
        .map(|x| classical_at(&response, params.kappa_r, e0_sq, x))
        .collect())
}

/// Motional density matrix in a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct MotionalDensityMatrix {
    pub matrix: CMat,
    pub x0: f64,
    pub eta_ld: f64,
}

impl MotionalDensityMatrix {
    pub fn fock(dim: usize, n: usize, x0: f64, eta_ld: f64) -> Result<Self> {
        if n >= dim {
            return Err(Error::InvalidParams(format!(
                "Fock level {n} outside truncation {dim}"
            )));
        }
        let mut matrix = CMat::zeros(dim, dim);
        matrix[(n, n)] = c(1.0);
        Ok(Self { matrix, x0, eta_ld })
    }

    pub fn ground(dim: usize, x0: f64, eta_ld: f64) -> Result<Self> {
        Self::fock(dim, 0, x0, eta_ld)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)]).sum()
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn phonon_expectation(&self) -> f64 {
        (0..self.dim())
            .map(|n| n as f64 * self.matrix[(n, n)].re)
            .sum()
    }

    pub fn top_population(&self) -> f64 {
        let m = self.dim() - 1;
        self.matrix[(m, m)].re
    }

    /// Largest entry of `ρ − ρ†`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let evd = self
            .matrix
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        Ok(evd
            .S()
            .column_vector()
            .iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min))
    }
}

fn trace_of_product(a: &CMat, b: &CMat) -> Complex64 {
    let n = a.nrows();
    let mut acc = c(0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Which of the two algebraically equivalent forms a generator was built in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorForm {
    /// `H_s = ω_m b†b − (i/2)E_0²` with jumps `E_0 S_c(x̂)`.
    ScatteringJumps,
    /// `H_m = ω_m b†b + Re V(x̂)` with cavity-output and emission jumps.
    Conventional,
}

/// Lindblad generator stored as `ρ̇ = −i(Kρ − ρK†) + Σ_j L_j ρ L_j†`
/// with non-Hermitian `K`.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    pub form: GeneratorForm,
    pub effective_hamiltonian: CMat,
    pub jumps: Vec<CMat>,
    pub x0: f64,
    pub eta_ld: f64,
}

fn number_operator_plus(dim: usize, omega_m: f64, extra: &CMat) -> CMat {
    let mut k = extra.clone();
    for n in 0..dim {
        k[(n, n)] += c(omega_m * n as f64);
    }
    k
}

impl LindbladGenerator {
    /// Jump form built from the effective S-matrix.
    pub fn scattering_jumps(params: &SystemParams, drive: &DriveFrequency, dim: usize) -> Result<Self> {
        params.validate()?;
        let basis = TrapPositionBasis::new(dim, params.x0, params.eta_ld())?;
        let s = EffectiveSMatrix::new(params, drive)?;
        let e0 = params.drive_amplitude;
        let mut anti = CMat::zeros(dim, dim);
        for n in 0..dim {
            anti[(n, n)] = Complex64::new(0.0, -0.5 * e0 * e0);
        }
        let jumps = Channel::ALL
            .iter()
            .filter(|&&channel| channel_is_open(params, channel))
            .map(|&channel| basis.operator(|x| e0 * s.at(x).get(channel)))
            .collect();
        Ok(Self {
            form: GeneratorForm::ScatteringJumps,
            effective_hamiltonian: number_operator_plus(dim, params.omega_m, &anti),
            jumps,
            x0: params.x0,
            eta_ld: params.eta_ld(),
        })
    }

    /// Conventional Lindblad form with Hermitian Hamiltonian
    /// `ω_m b†b + Re V(x̂)` and anticommutator `−½{ΣJ†J, ρ}`.
    pub fn conventional(params: &SystemParams, drive: &DriveFrequency, dim: usize) -> Result<Self> {
        params.validate()?;
        let basis = TrapPositionBasis::new(dim, params.x0, params.eta_ld())?;
        let s = EffectiveSMatrix::new(params, drive)?;
        let response = s.response;
        let e0 = params.drive_amplitude;
        let e0_sq = e0 * e0;

        let mut jumps = Vec::new();
        for rate in [params.kappa_r, params.kappa_t, params.kappa_in] {
            if rate > 0.0 {
                let amp = (rate * params.kappa_r).sqrt() * e0;
                jumps.push(basis.operator(|x| {
                    -Complex64::i() * amp / s.denominator(x)
                }));
            }
        }
        if channel_is_open(params, Channel::AtomicEmission) {
            jumps.push(basis.operator(|x| e0 * s.at(x).atomic_emission));
        }

        let re_v = basis.operator(|x| c(potential_at(&response, params.kappa_r, e0_sq, x).re));
        let mut decay = CMat::zeros(dim, dim);
        for j in &jumps {
            decay += j.adjoint() * j;
        }
        let mut extra = re_v;
        for i in 0..dim {
            for k in 0..dim {
                extra[(i, k)] -= Complex64::new(0.0, 0.5) * decay[(i, k)];
            }
        }
        Ok(Self {
            form: GeneratorForm::Conventional,
            effective_hamiltonian: number_operator_plus(dim, params.omega_m, &extra),
            jumps,
            x0: params.x0,
            eta_ld: params.eta_ld(),
        })
    }

    pub fn dim(&self) -> usize {
        self.effective_hamiltonian.nrows()
    }

    /// `ρ̇` for an arbitrary matrix `ρ`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let k = &self.effective_hamiltonian;
        let k_rho = k * rho;
        let rho_kd = rho * k.adjoint();
        let minus_i = Complex64::new(0.0, -1.0);
        let mut out = CMat::from_fn(rho.nrows(), rho.ncols(), |i, j| {
            minus_i * (k_rho[(i, j)] - rho_kd[(i, j)])
        });
        for l in &self.jumps {
            out += l * rho * l.adjoint();
        }
        out
    }

    /// Largest entry of `Σ_j L_j†L_j − i(K − K†)`; zero for a
    /// trace-preserving generator.
    pub fn completeness_defect(&self) -> f64 {
        let k = &self.effective_hamiltonian;
        let dim = self.dim();
        let mut sum = CMat::zeros(dim, dim);
        for l in &self.jumps {
            sum += l.adjoint() * l;
        }
        let mut worst = 0.0_f64;
        for i in 0..dim {
            for j in 0..dim {
                let target = Complex64::i() * (k[(i, j)] - k[(j, i)].conj());
                worst = worst.max((sum[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// `d⟨b†b⟩/dt` at the state `rho`.
    pub fn heating_rate(&self, rho: &MotionalDensityMatrix) -> f64 {
        let rate = self.apply(&rho.matrix);
        (0..self.dim()).map(|n| n as f64 * rate[(n, n)].re).sum()
    }
}

fn channel_is_open(params: &SystemParams, channel: Channel) -> bool {
    match channel {
        Channel::Reflection => true,
        Channel::Transmission => params.kappa_t > 0.0,
        Channel::IntrinsicLoss => params.kappa_in > 0.0,
        Channel::AtomicEmission => params.gamma > 0.0 && params.g0 > 0.0,
    }
}

/// Generator in the scattering-jump form with the default truncation.
pub fn lindblad_generator(
    params: &SystemParams,
    drive: &DriveFrequency,
    dim: usize,
) -> Result<LindbladGenerator> {
    LindbladGenerator::scattering_jumps(params, drive, dim)
}

/// Adaptive Dormand–Prince 5(4) settings.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: Option<f64>,
    pub min_step: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            initial_step: None,
            min_step: 1e-14,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub trace: f64,
    pub purity: f64,
    pub n_expect: f64,
    pub population_tail: f64,
}

impl TrajectoryPoint {
    fn of(t: f64, rho: &MotionalDensityMatrix) -> Self {
        Self {
            t,
            trace: rho.trace().re,
            purity: rho.purity(),
            n_expect: rho.phonon_expectation(),
            population_tail: rho.top_population(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub states: Vec<MotionalDensityMatrix>,
    pub steps_taken: usize,
}

impl Trajectory {
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "t,trace,purity,n_expect,population_tail")?;
        for p in &self.points {
            writeln!(
                out,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                p.t, p.trace, p.purity, p.n_expect, p.population_tail
            )?;
        }
        Ok(())
    }
}

// Dormand–Prince tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B_HIGH: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B_LOW: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn combine(base: &CMat, h: f64, coeffs: &[f64], stages: &[CMat]) -> CMat {
    let mut out = base.clone();
    for (w, k) in coeffs.iter().zip(stages) {
        if *w != 0.0 {
            out += faer::Scale(c(h * w)) * k;
        }
    }
    out
}

impl Integrator {
    /// Integrates from `rho0` to `t_final`, recording the state every
    /// `sample_dt` (and at `t_final`). Traces are never renormalized.
    pub fn propagate(
        &self,
        rho0: &MotionalDensityMatrix,
        generator: &LindbladGenerator,
        t_final: f64,
        sample_dt: f64,
    ) -> Result<Trajectory> {
        if !(t_final >= 0.0 && sample_dt > 0.0) {
            return Err(Error::InvalidParams(format!(
                "need t_final ≥ 0 and sample_dt > 0, got {t_final} and {sample_dt}"
            )));
        }
        if rho0.dim() != generator.dim() {
            return Err(Error::InvalidParams(format!(
                "state dimension {} does not match generator dimension {}",
                rho0.dim(),
                generator.dim()
            )));
        }
        let wrap = |matrix: CMat| MotionalDensityMatrix {
            matrix,
            x0: rho0.x0,
            eta_ld: rho0.eta_ld,
        };
        let check = |t: f64, rho: &MotionalDensityMatrix| -> Result<()> {
            let population = rho.top_population();
            if population > TRUNCATION_TOLERANCE {
                return Err(Error::TruncationExceeded { time: t, population });
            }
            Ok(())
        };

        check(0.0, rho0)?;
        let mut trajectory = Trajectory {
            points: vec![TrajectoryPoint::of(0.0, rho0)],
            states: vec![rho0.clone()],
            steps_taken: 0,
        };
        let mut t = 0.0;
        let mut y = rho0.matrix.clone();
        let mut k1 = generator.apply(&y);
        let mut h = self.initial_step.unwrap_or_else(|| {
            let scale = max_abs(&k1).max(1e-300);
            (0.01 / scale).min(sample_dt)
        });
        let mut sample_index = 1usize;

        while t < t_final {
            let next_sample = (sample_index as f64 * sample_dt).min(t_final);
            h = h.min(next_sample - t);
            if h < self.min_step * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { time: t, dt: h });
            }

            let mut stages: Vec<CMat> = Vec::with_capacity(7);
            stages.push(k1.clone());
            for row in A.iter().skip(1) {
                let arg = combine(&y, h, &row[..stages.len()], &stages);
                stages.push(generator.apply(&arg));
            }
            // FSAL: the 7th stage is evaluated at the 5th-order solution
            let y_new = combine(&y, h, &B_HIGH, &stages);
            let mut err = 0.0_f64;
            for i in 0..y.nrows() {
                for j in 0..y.ncols() {
                    let low: Complex64 = B_LOW
                        .iter()
                        .zip(&stages)
                        .map(|(b, k)| k[(i, j)] * *b)
                        .sum();
                    let high: Complex64 = B_HIGH
                        .iter()
                        .zip(&stages)
                        .map(|(b, k)| k[(i, j)] * *b)
                        .sum();
                    let scale =
                        self.atol + self.rtol * y[(i, j)].norm().max(y_new[(i, j)].norm());
                    err = err.max(((high - low) * h).norm() / scale);
                }
            }

            if err <= 1.0 {
                t += h;
                y = y_new;
                k1 = stages.pop().expect("seven stages");
                trajectory.steps_taken += 1;
                if t >= next_sample - 1e-12 * next_sample.abs().max(1.0) {
                    if next_sample == t_final {
                        t = t_final;
                    }
                    let rho = wrap(y.clone());
                    check(t, &rho)?;
                    trajectory.points.push(TrajectoryPoint::of(t, &rho));
                    trajectory.states.push(rho);
                    sample_index += 1;
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        }
        Ok(trajectory)
    }
}

fn max_abs(a: &CMat) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            worst = worst.max(a[(i, j)].norm());
        }
    }
    worst
}

/// Propagation with default tolerances.
pub fn propagate(
    rho0: &MotionalDensityMatrix,
    generator: &LindbladGenerator,
    t_final: f64,
    sample_dt: f64,
) -> Result<Trajectory> {
    Integrator::default().propagate(rho0, generator, t_final, sample_dt)
}
