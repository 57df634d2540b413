//! Physical parameters of the atom–cavity–trap system and the closed-form
//! quantities derived from them.
//!
//! Units: ħ = 1, every angular frequency is a plain number in units of
//! 2π × MHz, and positions are dimensionless phases `k_c x`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussHermite;

/// Number of Gauss–Hermite nodes used for ground-state averages.
pub const GROUND_STATE_QUADRATURE_NODES: usize = 48;

/// All rates and frequencies of the driven atom–cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Vacuum Rabi coupling at the anti-node.
    pub g0: f64,
    /// Atomic linewidth.
    pub gamma: f64,
    /// Decay through the input mirror (reflection port).
    pub kappa_r: f64,
    /// Decay through the output mirror (transmission port).
    pub kappa_t: f64,
    /// Intrinsic cavity loss.
    #[serde(default)]
    pub kappa_in: f64,
    /// Trap frequency.
    pub omega_m: f64,
    /// Recoil frequency.
    pub omega_rec: f64,
    /// Atom–cavity detuning `ω_0 − ω_c`.
    pub atom_cavity_detuning: f64,
    /// Trap centre `k_c x_0`.
    pub x0: f64,
    /// Drive amplitude `E_0` (square root of the incident photon flux).
    #[serde(default)]
    pub drive_amplitude: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g0", self.g0),
            ("gamma", self.gamma),
            ("kappa_r", self.kappa_r),
            ("kappa_t", self.kappa_t),
            ("kappa_in", self.kappa_in),
            ("omega_m", self.omega_m),
            ("omega_rec", self.omega_rec),
        ];
        for (name, value) in rates {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and non-negative, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("atom_cavity_detuning", self.atom_cavity_detuning),
            ("x0", self.x0),
            ("drive_amplitude", self.drive_amplitude),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.kappa() <= 0.0 {
            return Err(Error::InvalidParams(
                "total cavity linewidth must be positive".into(),
            ));
        }
        if self.omega_m <= 0.0 {
            return Err(Error::InvalidParams(
                "trap frequency must be positive for a finite Lamb-Dicke parameter".into(),
            ));
        }
        Ok(())
    }

    /// Bare cavity linewidth `κ_r + κ_t + κ_in`.
    pub fn kappa(&self) -> f64 {
        self.kappa_r + self.kappa_t + self.kappa_in
    }

    /// `η_LD = sqrt(ω_rec / ω_m)`, equal to `k_c x_zp`.
    pub fn eta_ld(&self) -> f64 {
        (self.omega_rec / self.omega_m).sqrt()
    }

    /// Set a field by name; used by config overrides.
    pub fn set_field(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "g0" => &mut self.g0,
            "gamma" => &mut self.gamma,
            "kappa_r" => &mut self.kappa_r,
            "kappa_t" => &mut self.kappa_t,
            "kappa_in" => &mut self.kappa_in,
            "omega_m" => &mut self.omega_m,
            "omega_rec" => &mut self.omega_rec,
            "atom_cavity_detuning" => &mut self.atom_cavity_detuning,
            "x0" => &mut self.x0,
            "drive_amplitude" => &mut self.drive_amplitude,
            _ => return Err(Error::InvalidParams(format!("unknown parameter `{key}`"))),
        };
        *slot = value;
        Ok(())
    }

    pub const FIELD_NAMES: [&'static str; 10] = [
        "g0",
        "gamma",
        "kappa_r",
        "kappa_t",
        "kappa_in",
        "omega_m",
        "omega_rec",
        "atom_cavity_detuning",
        "x0",
        "drive_amplitude",
    ];
}

/// Laser–cavity detuning `δ_c = ω_L − ω_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveFrequency {
    pub delta_c: f64,
}

impl DriveFrequency {
    pub fn new(delta_c: f64) -> Self {
        Self { delta_c }
    }

    /// Laser–atom detuning `δ_0 = δ_c − (ω_0 − ω_c)`.
    pub fn delta_0(&self, params: &SystemParams) -> f64 {
        self.delta_c - params.atom_cavity_detuning
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self::new(self.delta_c + by)
    }
}

/// Cavity mode amplitude `u(x) = cos(k_c x)`.
pub fn mode_profile(x: f64) -> f64 {
    x.cos()
}

/// `g0² / (δ_0² + γ²/4)`, shared by the dispersive shift and the emission rate.
fn dispersive_factor(params: &SystemParams, delta_0: f64) -> Result<f64> {
    let denom = delta_0 * delta_0 + 0.25 * params.gamma * params.gamma;
    if denom == 0.0 {
        if params.g0 == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateDetuning);
    }
    Ok(params.g0 * params.g0 / denom)
}

/// Dispersive cavity shift per unit mode intensity,
/// `g_om = −g0² δ_0 / (δ_0² + γ²/4)`.
pub fn optomechanical_coupling(params: &SystemParams, drive: &DriveFrequency) -> Result<f64> {
    let delta_0 = drive.delta_0(params);
    Ok(-dispersive_factor(params, delta_0)? * delta_0)
}

/// Rate at which the atom scatters cavity photons per unit mode intensity,
/// `γ g0² / (δ_0² + γ²/4)`.
pub fn atomic_emission_rate(params: &SystemParams, drive: &DriveFrequency) -> Result<f64> {
    Ok(params.gamma * dispersive_factor(params, drive.delta_0(params))?)
}

/// Position-dependent cavity–laser detuning `Δ_c(x) = δ_c + g_om u²(x)`.
pub fn position_detuning(params: &SystemParams, drive: &DriveFrequency, x: f64) -> Result<f64> {
    let g_om = optomechanical_coupling(params, drive)?;
    Ok(drive.delta_c + g_om * mode_profile(x).powi(2))
}

/// Cavity linewidth including atom-mediated emission,
/// `κ(x) = κ + γ g0²/(δ_0² + γ²/4) u²(x)`.
pub fn effective_linewidth(params: &SystemParams, drive: &DriveFrequency, x: f64) -> Result<f64> {
    let rate = atomic_emission_rate(params, drive)?;
    Ok(params.kappa() + rate * mode_profile(x).powi(2))
}

/// Evaluates `Δ_c(x)` and `κ(x)` on many positions without re-deriving the
/// dispersive factors each time.
#[derive(Debug, Clone, Copy)]
pub struct CavityResponse {
    pub delta_c: f64,
    pub g_om: f64,
    pub emission_rate: f64,
    pub kappa: f64,
}

impl CavityResponse {
    pub fn new(params: &SystemParams, drive: &DriveFrequency) -> Result<Self> {
        let factor = dispersive_factor(params, drive.delta_0(params))?;
        Ok(Self {
            delta_c: drive.delta_c,
            g_om: -factor * drive.delta_0(params),
            emission_rate: params.gamma * factor,
            kappa: params.kappa(),
        })
    }

    pub fn detuning(&self, x: f64) -> f64 {
        self.delta_c + self.g_om * mode_profile(x).powi(2)
    }

    pub fn linewidth(&self, x: f64) -> f64 {
        self.kappa + self.emission_rate * mode_profile(x).powi(2)
    }
}

/// Ground-state average `⟨Ψ_0|κ(x)|Ψ_0⟩` for a trap centred at `params.x0`.
pub fn ground_state_linewidth(params: &SystemParams, drive: &DriveFrequency) -> Result<f64> {
    let response = CavityResponse::new(params, drive)?;
    let rule = GaussHermite::new(GROUND_STATE_QUADRATURE_NODES)?;
    Ok(rule.ground_state_average(params.x0, params.eta_ld(), |x| response.linewidth(x)))
}

/// Closed-form quantities that characterise a parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub g_om: f64,
    pub kappa_at_x0: f64,
    pub g_m: f64,
    pub r_zp: f64,
    /// Spatial resolution `k_c R = κ(x_0)/|g_om|` (infinite without coupling).
    pub resolution_r: f64,
    pub eta_ld: f64,
}

impl DerivedQuantities {
    pub fn compute(params: &SystemParams, drive: &DriveFrequency) -> Result<Self> {
        params.validate()?;
        let g_om = optomechanical_coupling(params, drive)?;
        let kappa_at_x0 = ground_state_linewidth(params, drive)?;
        let eta_ld = params.eta_ld();
        let g_m = g_om.abs() * eta_ld;
        Ok(Self {
            g_om,
            kappa_at_x0,
            g_m,
            r_zp: 2.0 * g_m / kappa_at_x0,
            resolution_r: if g_om == 0.0 {
                f64::INFINITY
            } else {
                kappa_at_x0 / g_om.abs()
            },
            eta_ld,
        })
    }
}

/// Zero-point resolution
/// `r_zp = η_LD · 2 g0² |δ_0| / (κ(x_0) (δ_0² + γ²/4))`
/// with `κ(x_0)` averaged over the motional ground state.
pub fn zero_point_resolution(params: &SystemParams, drive: &DriveFrequency) -> Result<f64> {
    Ok(DerivedQuantities::compute(params, drive)?.r_zp)
}

/// Damped fixed-point solver for the drive that makes `x_r` resonant.
#[derive(Debug, Clone, Copy)]
pub struct ResonanceSolver {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for ResonanceSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 200,
            damping: 0.5,
        }
    }
}

impl ResonanceSolver {
    /// Finds `δ_c` with `Δ_c(x_r) = 0`. The dispersive shift depends on
    /// `δ_c` through `δ_0`, so iterate `δ_c ← −g_om(δ_c) u²(x_r)`; switch to
    /// damped updates as soon as a step fails to shrink.
    pub fn solve(&self, params: &SystemParams, x_r: f64) -> Result<DriveFrequency> {
        let u2 = mode_profile(x_r).powi(2);
        let map = |delta_c: f64| -> Result<f64> {
            Ok(-optomechanical_coupling(params, &DriveFrequency::new(delta_c))? * u2)
        };

        let mut delta_c = 0.0;
        let mut last_step = f64::INFINITY;
        let mut damped = false;
        for _ in 0..self.max_iterations {
            let target = map(delta_c)?;
            let step = target - delta_c;
            if step.abs() <= self.tolerance * target.abs().max(params.kappa()) {
                return Ok(DriveFrequency::new(target));
            }
            if !damped && step.abs() >= last_step {
                damped = true;
            }
            let weight = if damped { self.damping } else { 1.0 };
            delta_c += weight * step;
            last_step = step.abs();
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
            last_step,
        })
    }
}

/// Drive frequency for which `Δ_c(x_r) = 0`, with default solver settings.
pub fn solve_resonant_drive(params: &SystemParams, x_r: f64) -> Result<DriveFrequency> {
    params.validate()?;
    ResonanceSolver::default().solve(params, x_r)
}

/// Resonant drive at fixed laser–atom detuning `δ_0`: returns the parameter
/// set with `ω_0 − ω_c` adjusted so that `x_r` is resonant, plus the drive.
pub fn resonant_drive_at_atom_detuning(
    params: &SystemParams,
    delta_0: f64,
    x_r: f64,
) -> Result<(SystemParams, DriveFrequency)> {
    let factor = dispersive_factor(params, delta_0)?;
    let g_om = -factor * delta_0;
    let delta_c = -g_om * mode_profile(x_r).powi(2);
    let mut adjusted = *params;
    adjusted.atom_cavity_detuning = delta_c - delta_0;
    Ok((adjusted, DriveFrequency::new(delta_c)))
}

/// Positions in one period `[0, π)` where `Δ_c(x) = 0`.
///
/// `g_om` does not depend on position, so the roots follow from inverting
/// `u²(x) = −δ_c/g_om`; this also catches the tangential root at a node.
pub fn resonant_positions(params: &SystemParams, drive: &DriveFrequency) -> Result<Vec<f64>> {
    let g_om = optomechanical_coupling(params, drive)?;
    if g_om == 0.0 {
        return Ok(Vec::new());
    }
    let target = -drive.delta_c / g_om;
    if !(0.0..=1.0).contains(&target) {
        return Ok(Vec::new());
    }
    let first = target.sqrt().acos();
    let second = std::f64::consts::PI - first;
    let mut roots = vec![first];
    if (second - first).abs() > 1e-12 && second < std::f64::consts::PI - 1e-15 {
        roots.push(second);
    }
    Ok(roots)
}

/// Named parameter sets for the experimental platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    PhotonicCrystal,
    FiberI,
    FiberII,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::PhotonicCrystal, Preset::FiberI, Preset::FiberII];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::PhotonicCrystal => "photonic-crystal",
            Preset::FiberI => "fiber-I",
            Preset::FiberII => "fiber-II",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(name))
    }

    pub fn description(&self) -> &'static str {
        match self {
            Preset::PhotonicCrystal => {
                "Rb atom in a photonic-crystal nanocavity (Q ~ 1e6), eta_LD = 0.25"
            }
            Preset::FiberI => "40Ca+ ion in a fiber cavity, parameter set I (trap 50 kHz, w0-wc = 4 g0)",
            Preset::FiberII => "40Ca+ ion in a fiber cavity, parameter set II (trap 0.1 MHz, w0-wc = 2 g0)",
        }
    }

    pub fn params(&self) -> SystemParams {
        match self {
            Preset::PhotonicCrystal => {
                let g0 = 10_000.0;
                let omega_rec = 0.0038;
                SystemParams {
                    g0,
                    gamma: 6.0,
                    kappa_r: 125.0,
                    kappa_t: 125.0,
                    kappa_in: 0.0,
                    omega_m: omega_rec / (0.25 * 0.25),
                    omega_rec,
                    atom_cavity_detuning: 2.0 * g0,
                    x0: FRAC_PI_4,
                    drive_amplitude: 1.0,
                }
            }
            Preset::FiberI => {
                let g0 = 41.0;
                SystemParams {
                    g0,
                    gamma: 11.2,
                    kappa_r: 4.0,
                    kappa_t: 4.0,
                    kappa_in: 0.0,
                    omega_m: 0.05,
                    omega_rec: 0.0068,
                    atom_cavity_detuning: 4.0 * g0,
                    x0: FRAC_PI_4,
                    drive_amplitude: 0.1,
                }
            }
            Preset::FiberII => {
                let g0 = 21.0;
                SystemParams {
                    g0,
                    gamma: 11.2,
                    kappa_r: 2.8,
                    kappa_t: 0.8,
                    kappa_in: 0.0,
                    omega_m: 0.1,
                    omega_rec: 0.0068,
                    atom_cavity_detuning: 2.0 * g0,
                    x0: FRAC_PI_4,
                    drive_amplitude: 0.1,
                }
            }
        }
    }
}

/// Loads parameters from JSON whose keys are the [`SystemParams`] field names.
pub fn params_from_json(text: &str) -> Result<SystemParams> {
    let params: SystemParams =
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(e.to_string()))?;
    params.validate()?;
    Ok(params)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use super::*;

    fn ideal(g0: f64, delta_0: f64) -> SystemParams {
        SystemParams {
            g0,
            gamma: 0.0,
            kappa_r: 0.5,
            kappa_t: 0.5,
            kappa_in: 0.0,
            omega_m: 0.01,
            omega_rec: 0.0001,
            atom_cavity_detuning: -delta_0,
            x0: FRAC_PI_4,
            drive_amplitude: 1.0,
        }
    }

    #[test]
    fn mode_profile_values() {
        assert_eq!(mode_profile(0.0), 1.0);
        assert!(mode_profile(FRAC_PI_2).abs() < 1e-16);
        assert!((mode_profile(FRAC_PI_4) - 0.5_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn empty_cavity_has_no_shift() {
        let params = ideal(0.0, -3.0);
        let drive = DriveFrequency::new(0.37);
        for x in [0.0, 0.4, 1.3] {
            assert_eq!(position_detuning(&params, &drive, x).unwrap(), 0.37);
            assert_eq!(effective_linewidth(&params, &drive, x).unwrap(), 1.0);
        }
    }

    #[test]
    fn node_sees_bare_detuning() {
        let mut params = Preset::FiberI.params();
        params.x0 = 0.1;
        let drive = DriveFrequency::new(-2.0);
        let at_node = position_detuning(&params, &drive, FRAC_PI_2).unwrap();
        assert!((at_node - drive.delta_c).abs() < 1e-12);
        let kappa_node = effective_linewidth(&params, &drive, FRAC_PI_2).unwrap();
        assert!((kappa_node - params.kappa()).abs() < 1e-12);
    }

    #[test]
    fn coupling_at_two_g0_detuning() {
        // γ = 0, δ_0 = −2 g0 → g_om = g0/2
        let params = ideal(3.0, -6.0);
        let g_om = optomechanical_coupling(&params, &DriveFrequency::new(0.0)).unwrap();
        assert!((g_om - 1.5).abs() < 1e-14);

        // g0 = 20 κ gives g_om = 10 κ
        let params = ideal(20.0, -40.0);
        let g_om = optomechanical_coupling(&params, &DriveFrequency::new(0.0)).unwrap();
        assert!((g_om - 10.0 * params.kappa()).abs() < 1e-12);
    }

    #[test]
    fn coupling_vanishes_far_detuned() {
        let params = ideal(1.0, -1e9);
        let g_om = optomechanical_coupling(&params, &DriveFrequency::new(0.0)).unwrap();
        assert!(g_om.abs() < 1e-8);
    }

    #[test]
    fn degenerate_detuning_is_reported() {
        let params = ideal(1.0, 0.0);
        let err = optomechanical_coupling(&params, &DriveFrequency::new(0.0)).unwrap_err();
        assert_eq!(err, Error::DegenerateDetuning);
    }

    #[test]
    fn zero_point_resolution_without_coupling() {
        let params = ideal(0.0, -5.0);
        let r = zero_point_resolution(&params, &DriveFrequency::new(0.0)).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn resolution_without_emission_is_two_gm_over_kappa() {
        let params = ideal(2.0, -4.0);
        let drive = DriveFrequency::new(0.0);
        let derived = DerivedQuantities::compute(&params, &drive).unwrap();
        let expected = 2.0 * derived.g_om * params.eta_ld() / params.kappa();
        assert!((derived.r_zp - expected).abs() < 1e-15);
        assert!((derived.r_zp - 2.0 * derived.g_m / params.kappa()).abs() < 1e-15);
    }

    #[test]
    fn ground_state_linewidth_matches_closed_form() {
        let params = Preset::FiberI.params();
        let drive = DriveFrequency::new(-4.9);
        let eta = params.eta_ld();
        let rate = atomic_emission_rate(&params, &drive).unwrap();
        let mean_u2 = 0.5 * (1.0 + (2.0 * params.x0).cos() * (-2.0 * eta * eta).exp());
        let expected = params.kappa() + rate * mean_u2;
        let got = ground_state_linewidth(&params, &drive).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn solver_without_atom_returns_zero() {
        let params = ideal(0.0, -5.0);
        assert_eq!(solve_resonant_drive(&params, FRAC_PI_4).unwrap().delta_c, 0.0);
    }

    #[test]
    fn solver_matches_plain_iteration_oracle() {
        // hand-rolled undamped iteration as oracle
        let params = Preset::FiberI.params();
        let mut delta_c = 0.0_f64;
        for _ in 0..100 {
            let delta_0 = delta_c - params.atom_cavity_detuning;
            let g_om = -params.g0.powi(2) * delta_0 / (delta_0.powi(2) + params.gamma.powi(2) / 4.0);
            delta_c = -g_om * 0.5;
        }
        let solved = solve_resonant_drive(&params, FRAC_PI_4).unwrap();
        assert!((solved.delta_c - delta_c).abs() < 1e-10);
        assert!((2.0 * solved.delta_c / params.kappa() + 1.24).abs() < 0.005);
        let residual = position_detuning(&params, &solved, FRAC_PI_4).unwrap();
        assert!(residual.abs() < 1e-10 * params.kappa());
    }

    #[test]
    fn solver_converges_near_the_atomic_resonance() {
        let params = SystemParams {
            g0: 10.0,
            gamma: 0.0,
            kappa_r: 0.5,
            kappa_t: 0.5,
            kappa_in: 0.0,
            omega_m: 0.01,
            omega_rec: 0.0001,
            atom_cavity_detuning: 11.0,
            x0: 0.0,
            drive_amplitude: 0.0,
        };
        let drive = ResonanceSolver::default().solve(&params, 0.0).unwrap();
        let residual = position_detuning(&params, &drive, 0.0).unwrap();
        assert!(residual.abs() < 1e-9, "residual {residual}");
    }

    #[test]
    fn no_convergence_is_reported() {
        let params = Preset::FiberI.params();
        let solver = ResonanceSolver {
            max_iterations: 2,
            ..ResonanceSolver::default()
        };
        assert!(matches!(
            solver.solve(&params, FRAC_PI_4),
            Err(Error::NoConvergence { iterations: 2, .. })
        ));
    }

    #[test]
    fn resonant_positions_cases() {
        // hold δ_0 = −4 while moving δ_c, so g_om = 1 throughout
        let at = |delta_c: f64| {
            let mut params = ideal(2.0, -4.0);
            params.atom_cavity_detuning = delta_c + 4.0;
            resonant_positions(&params, &DriveFrequency::new(delta_c)).unwrap()
        };
        let roots = at(-0.5);
        assert_eq!(roots.len(), 2);
        assert!((roots[0] - FRAC_PI_4).abs() < 1e-12);
        assert!((roots[1] - 3.0 * FRAC_PI_4).abs() < 1e-12);

        let roots = at(0.0);
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - FRAC_PI_2).abs() < 1e-12);

        assert!(at(-2.0).is_empty());
        assert!(at(0.5).is_empty());
    }

    #[test]
    fn resonant_positions_are_roots() {
        let params = Preset::FiberII.params();
        let drive = solve_resonant_drive(&params, 0.6).unwrap();
        let roots = resonant_positions(&params, &drive).unwrap();
        assert!(roots.iter().any(|r| (r - 0.6).abs() < 1e-9));
        for r in roots {
            assert!(r >= 0.0 && r < PI);
            assert!(position_detuning(&params, &drive, r).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn argmin_of_detuning_matches_resonance() {
        let params = Preset::FiberI.params();
        let drive = solve_resonant_drive(&params, FRAC_PI_4).unwrap();
        let n = 20_000;
        let step = FRAC_PI_2 / n as f64;
        let argmin = (0..=n)
            .map(|i| i as f64 * step)
            .min_by(|a, b| {
                let da = position_detuning(&params, &drive, *a).unwrap().abs();
                let db = position_detuning(&params, &drive, *b).unwrap().abs();
                da.total_cmp(&db)
            })
            .unwrap();
        assert!((argmin - FRAC_PI_4).abs() <= step);
    }

    #[test]
    fn preset_lookup_and_json() {
        assert_eq!(Preset::from_name("fiber-i"), Some(Preset::FiberI));
        assert_eq!(Preset::from_name("nope"), None);
        let json = serde_json::to_string(&Preset::FiberII.params()).unwrap();
        assert_eq!(params_from_json(&json).unwrap(), Preset::FiberII.params());
        assert!(params_from_json(r#"{"g0": 1.0}"#).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        let mut params = Preset::FiberI.params();
        params.omega_m = 0.0;
        assert!(params.validate().is_err());
        let mut params = Preset::FiberI.params();
        params.kappa_r = 0.0;
        params.kappa_t = 0.0;
        assert!(params.validate().is_err());
        let mut params = Preset::FiberI.params();
        params.gamma = -1.0;
        assert!(params.validate().is_err());
    }
}
