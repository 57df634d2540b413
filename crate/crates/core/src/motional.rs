//! Motional wave functions of the trapped atom on a uniform position grid.
//!
//! Positions are `k_c x`. The trap ground state has standard deviation
//! `η_LD` in these units, so the oscillator coordinate is
//! `ξ = (x − x_0) / (√2 η_LD)`.
//!
//! The grid is treated as periodic: quadrature is the plain sum times the
//! spacing, and momenta come from an FFT. Both are exact up to the edge
//! amplitude, which [`MotionalWavefunction::edge_leak`] reports.

use std::f64::consts::{LN_10, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Relative edge amplitude above which a state is said to leak.
pub const EDGE_LEAK_TOLERANCE: f64 = 1e-8;

/// Allowed deviation of `⟨ψ|ψ⟩` from one for operations that need a
/// normalized state.
pub const NORM_TOLERANCE: f64 = 1e-8;

const MIN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl PositionGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "need finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(center - half_width, center + half_width, n_points)
    }

    /// Grid spanning ±10 η_LD around the trap centre with spacing at most
    /// `min(η_LD, R)/20`, rounded up to a power of two.
    pub fn auto(x0: f64, eta_ld: f64, resolution: f64) -> Result<Self> {
        if !(eta_ld > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "Lamb-Dicke parameter must be positive, got {eta_ld}"
            )));
        }
        let half_width = 10.0 * eta_ld;
        let finest = if resolution.is_finite() && resolution > 0.0 {
            eta_ld.min(resolution)
        } else {
            eta_ld
        };
        let max_spacing = finest / 20.0;
        let needed = (2.0 * half_width / max_spacing).ceil() as usize;
        let n_points = needed.max(MIN_POINTS).next_power_of_two();
        Self::centered(x0, half_width, n_points)
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.point(i))
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let step = 2.0 * PI / (self.x_max - self.x_min);
        (0..n)
            .map(|j| {
                let signed = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                signed * step
            })
            .collect()
    }

    /// Same extent with twice the points.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionalWavefunction {
    pub grid: PositionGrid,
    pub amplitudes: Vec<Complex64>,
    pub trap_center: f64,
    pub eta_ld: f64,
}

impl MotionalWavefunction {
    pub fn from_fn(
        grid: PositionGrid,
        trap_center: f64,
        eta_ld: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Self {
        let amplitudes = grid.points().map(f).collect();
        Self {
            grid,
            amplitudes,
            trap_center,
            eta_ld,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(())
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm_sqr = self.norm_sqr();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized { norm_sqr });
        }
        let scale = norm_sqr.sqrt().recip();
        self.amplitudes.iter_mut().for_each(|a| *a *= scale);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `⟨self|other⟩` by quadrature. Both states must share a grid.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.grid, other.grid);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.spacing()
    }

    /// Pointwise product with a function sampled on the same grid.
    pub fn multiplied(&self, factor: &[Complex64]) -> Self {
        assert_eq!(factor.len(), self.amplitudes.len());
        Self {
            amplitudes: self
                .amplitudes
                .iter()
                .zip(factor)
                .map(|(a, f)| a * f)
                .collect(),
            ..self.clone()
        }
    }

    /// Largest edge amplitude relative to the peak amplitude.
    pub fn edge_leak(&self) -> f64 {
        let peak = self
            .amplitudes
            .iter()
            .map(|a| a.norm())
            .fold(0.0_f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let first = self.amplitudes.first().map_or(0.0, |a| a.norm());
        let last = self.amplitudes.last().map_or(0.0, |a| a.norm());
        first.max(last) / peak
    }

    pub fn ensure_contained(&self) -> Result<()> {
        let leak = self.edge_leak();
        if leak > EDGE_LEAK_TOLERANCE {
            return Err(Error::GridTooNarrow { leak });
        }
        Ok(())
    }

    /// Probability density on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.spacing();
        self.grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, a)| x * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sqr()
    }

    /// `⟨(x − x_0)²⟩` about the trap centre.
    pub fn displacement_variance(&self) -> f64 {
        let dx = self.grid.spacing();
        self.grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, a)| (x - self.trap_center).powi(2) * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sqr()
    }

    /// `⟨p̃²⟩` for the momentum conjugate to `k_c x`, evaluated spectrally.
    pub fn momentum_variance(&self) -> f64 {
        let mut buffer = self.amplitudes.clone();
        FftPlanner::new()
            .plan_fft_forward(buffer.len())
            .process(&mut buffer);
        let k = self.grid.wavenumbers();
        let (weighted, total) = buffer
            .iter()
            .zip(&k)
            .fold((0.0, 0.0), |(w, t), (c, k)| {
                let p = c.norm_sqr();
                (w + k * k * p, t + p)
            });
        weighted / total
    }

    /// Writes `x,re_psi,im_psi` rows.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "x,re_psi,im_psi")?;
        for (x, a) in self.grid.points().zip(&self.amplitudes) {
            writeln!(out, "{x:.12e},{:.12e},{:.12e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// Values of the normalized Hermite functions `ψ_0(ξ) … ψ_{n_max}(ξ)`
/// (normalized in `ξ`).
///
/// Upward recurrence on a mantissa with a separate logarithmic scale, so the
/// Gaussian factor never underflows before the polynomial part has grown.
pub fn hermite_functions(xi: f64, n_max: usize) -> Vec<f64> {
    const RESCALE: f64 = 1e150;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * xi * xi - 0.25 * PI.ln();
    let mut prev = 0.0_f64;
    let mut current = 1.0_f64;
    for n in 0..=n_max {
        out.push(if current == 0.0 {
            0.0
        } else {
            current.signum() * (current.abs().ln() + log_scale).exp()
        });
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * xi * current - (nf / (nf + 1.0)).sqrt() * prev;
        prev = current;
        current = next;
        if current.abs() > RESCALE {
            current /= RESCALE;
            prev /= RESCALE;
            log_scale += 150.0 * LN_10;
        }
    }
    out
}

fn oscillator_coordinate(x: f64, x0: f64, eta_ld: f64) -> f64 {
    (x - x0) / (SQRT_2 * eta_ld)
}

/// `n`-th trap eigenfunction evaluated on `grid`, without edge checks.
fn fock_amplitudes(grid: &PositionGrid, x0: f64, eta_ld: f64, n: usize) -> Vec<Complex64> {
    let scale = (SQRT_2 * eta_ld).sqrt().recip();
    grid.points()
        .map(|x| {
            let values = hermite_functions(oscillator_coordinate(x, x0, eta_ld), n);
            Complex64::new(scale * values[n], 0.0)
        })
        .collect()
}

/// Trap ground state `Ψ_0(x) ∝ exp(−(x − x_0)²/(4 η_LD²))`.
pub fn ground_state(grid: PositionGrid, x0: f64, eta_ld: f64) -> Result<MotionalWavefunction> {
    fock_state(grid, x0, eta_ld, 0)
}

/// `n`-th harmonic-oscillator eigenstate of the trap.
pub fn fock_state(
    grid: PositionGrid,
    x0: f64,
    eta_ld: f64,
    n: usize,
) -> Result<MotionalWavefunction> {
    if !(eta_ld > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Lamb-Dicke parameter must be positive, got {eta_ld}"
        )));
    }
    let psi = MotionalWavefunction {
        amplitudes: fock_amplitudes(&grid, x0, eta_ld, n),
        grid,
        trap_center: x0,
        eta_ld,
    };
    psi.ensure_contained()?;
    // remove the O(dx) quadrature defect so norm is exactly one on this grid
    psi.normalized()
}

/// Mean phonon number `⟨b†b⟩` of the trap.
///
/// `n̄ = ½[⟨(x−x_0)²⟩/(2η²) + 2η²⟨p̃²⟩ − 1]`.
pub fn phonon_expectation(psi: &MotionalWavefunction) -> Result<f64> {
    psi.ensure_normalized()?;
    let eta2 = psi.eta_ld * psi.eta_ld;
    let x2 = psi.displacement_variance();
    let p2 = psi.momentum_variance();
    Ok(0.5 * (x2 / (2.0 * eta2) + 2.0 * eta2 * p2 - 1.0))
}

/// `⟨n|ψ⟩` against the trap Fock state `n`.
pub fn fock_overlap(psi: &MotionalWavefunction, n: usize) -> Result<Complex64> {
    psi.ensure_normalized()?;
    let basis = fock_amplitudes(&psi.grid, psi.trap_center, psi.eta_ld, n);
    Ok(basis
        .iter()
        .zip(&psi.amplitudes)
        .map(|(f, a)| f.conj() * a)
        .sum::<Complex64>()
        * psi.grid.spacing())
}

/// Coefficients `⟨n|ψ⟩` for `n = 0..=n_max` in a single recurrence pass.
pub fn fock_decomposition(psi: &MotionalWavefunction, n_max: usize) -> Result<Vec<Complex64>> {
    psi.ensure_normalized()?;
    let scale = (SQRT_2 * psi.eta_ld).sqrt().recip() * psi.grid.spacing();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n_max + 1];
    for (x, a) in psi.grid.points().zip(&psi.amplitudes) {
        let values = hermite_functions(oscillator_coordinate(x, psi.trap_center, psi.eta_ld), n_max);
        for (c, v) in coeffs.iter_mut().zip(values) {
            *c += a * (v * scale);
        }
    }
    Ok(coeffs)
}
