use std::f64::consts::{FRAC_PI_4, PI};

use cavom::dynamics::{LindbladGenerator, MotionalDensityMatrix};
use cavom::full_jc::FullModelDecomposition;
use cavom::model::{
    effective_linewidth, position_detuning, resonant_positions, solve_resonant_drive,
    DerivedQuantities, DriveFrequency, Preset, SystemParams,
};
use cavom::motional::{fock_decomposition, fock_state, ground_state, phonon_expectation, PositionGrid};
use cavom::scattering::{scatter_photon, EffectiveSMatrix, ResolutionFamily};
use faer::Mat;
use num_complex::Complex64;
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = SystemParams> {
    (
        1.0..60.0f64,
        0.0..15.0f64,
        0.5..6.0f64,
        0.0..6.0f64,
        0.0..2.0f64,
        0.1..0.5f64,
        1.0..5.0f64,
        0.2..1.3f64,
    )
        .prop_map(|(g0, gamma, kappa_r, kappa_t, kappa_in, omega_m, det, x0)| SystemParams {
            g0,
            gamma,
            kappa_r,
            kappa_t,
            kappa_in,
            omega_m,
            omega_rec: 0.0068,
            atom_cavity_detuning: det * g0,
            x0,
            drive_amplitude: 0.1,
        })
}

fn wide_ground(params: &SystemParams) -> cavom::MotionalWavefunction {
    let eta = params.eta_ld();
    let grid = PositionGrid::centered(params.x0, 12.0 * eta, 2048).unwrap();
    ground_state(grid, params.x0, eta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn detuning_and_linewidth_are_periodic_and_even(
        params in params_strategy(), delta_c in -50.0..50.0f64, x in -4.0..4.0f64,
    ) {
        let drive = DriveFrequency::new(delta_c);
        let d = position_detuning(&params, &drive, x).unwrap();
        let k = effective_linewidth(&params, &drive, x).unwrap();
        for y in [x + PI, -x] {
            prop_assert!((position_detuning(&params, &drive, y).unwrap() - d).abs() < 1e-9 * (1.0 + d.abs()));
            prop_assert!((effective_linewidth(&params, &drive, y).unwrap() - k).abs() < 1e-9 * k);
        }
        prop_assert!(k >= params.kappa());
    }

    #[test]
    fn resolution_without_emission_is_twice_gm_over_kappa(
        mut params in params_strategy(), delta_c in -50.0..50.0f64,
    ) {
        params.gamma = 0.0;
        let drive = DriveFrequency::new(delta_c);
        let q = DerivedQuantities::compute(&params, &drive).unwrap();
        prop_assert!((q.r_zp - 2.0 * q.g_om.abs() * q.eta_ld / params.kappa()).abs() <= 1e-14 * q.r_zp.max(1.0));
    }

    #[test]
    fn solved_drive_is_resonant(params in params_strategy(), x_r in 0.1..1.4f64) {
        let drive = solve_resonant_drive(&params, x_r).unwrap();
        let residual = position_detuning(&params, &drive, x_r).unwrap();
        prop_assert!(residual.abs() < 1e-10 * params.kappa());
        let roots = resonant_positions(&params, &drive).unwrap();
        prop_assert!(roots.iter().any(|r| (r - x_r).abs() < 1e-8));
    }

    #[test]
    fn pointwise_unitarity(params in params_strategy(), delta_c in -80.0..80.0f64, x in -3.0..3.0f64) {
        let s = EffectiveSMatrix::new(&params, &DriveFrequency::new(delta_c)).unwrap();
        prop_assert!((s.at(x).total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_inequalities(params in params_strategy(), delta_c in -30.0..30.0f64) {
        let drive = DriveFrequency::new(delta_c);
        let out = scatter_photon(&wide_ground(&params), &params, &drive).unwrap();
        prop_assert!((out.probabilities.total() - 1.0).abs() < 1e-10);
        if let Ok(g2) = out.g2() {
            prop_assert!(g2.g2_tt >= 1.0 - 1e-12);
        }
        let phonons = out.phonons().unwrap();
        let p = out.probabilities;
        let sum = [
            (p.reflection, phonons.n_r),
            (p.transmission, phonons.n_t),
            (p.atomic_emission, phonons.n_at),
            (p.intrinsic_loss, phonons.n_loss),
        ]
        .iter()
        .map(|(p, n)| n.map_or(0.0, |n| p * n))
        .sum::<f64>();
        prop_assert!((sum - phonons.n_total).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fock_and_grid_views_agree(params in params_strategy(), delta_c in -20.0..20.0f64) {
        let out = scatter_photon(&wide_ground(&params), &params, &DriveFrequency::new(delta_c)).unwrap();
        for channel in cavom::Channel::ALL {
            if let Some(state) = out.conditional_state(channel) {
                let coeffs = fock_decomposition(state, 200).unwrap();
                let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
                let mean: f64 = coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum();
                prop_assert!((norm - 1.0).abs() < 1e-6, "{channel}: {norm}");
                prop_assert!((mean - phonon_expectation(state).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn generator_is_trace_preserving(params in params_strategy(), delta_c in -20.0..20.0f64, seed in 0u64..1000) {
        let drive = DriveFrequency::new(delta_c);
        let dim = 20;
        let generator = LindbladGenerator::scattering_jumps(&params, &drive, dim).unwrap();
        let mut state = seed.wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut rho = Mat::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            rho[(i, i)] = next().into();
            for j in 0..i {
                let z = Complex64::new(next(), next());
                rho[(i, j)] = z;
                rho[(j, i)] = z.conj();
            }
        }
        let rate = generator.apply(&rho);
        let trace: Complex64 = (0..dim).map(|i| rate[(i, i)]).sum();
        prop_assert!(trace.norm() < 1e-12);

        let mixed = Mat::<Complex64>::from_fn(dim, dim, |i, j| if i == j { (1.0 / dim as f64).into() } else { 0.0.into() });
        let rate = generator.apply(&mixed);
        let trace: Complex64 = (0..dim).map(|i| rate[(i, i)]).sum();
        prop_assert!(trace.norm() < 1e-12);
        prop_assert!(cavom::dynamics::hermiticity_defect(&rate) < 1e-13);
    }

    #[test]
    fn full_model_is_complete(params in params_strategy()) {
        let drive = solve_resonant_drive(&params, params.x0).unwrap();
        let d = FullModelDecomposition::new(&params, &drive, 32).unwrap();
        let s = cavom::full_jc::s_matrix_elements(&d, &params, &drive).unwrap();
        prop_assert!((s.total_probability() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn phonon_number_converges_with_grid() {
    let eta = 0.1;
    for n in 0..=5 {
        let coarse = PositionGrid::centered(FRAC_PI_4, 14.0 * eta, 512).unwrap();
        let a = phonon_expectation(&fock_state(coarse, FRAC_PI_4, eta, n).unwrap()).unwrap();
        let b = phonon_expectation(&fock_state(coarse.refined(), FRAC_PI_4, eta, n).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-8, "n = {n}: {a} vs {b}");
    }
}

#[test]
fn transmission_localizes_more_with_resolution() {
    let family = ResolutionFamily::new(0.05);
    let mut previous = f64::INFINITY;
    for r_zp in [0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let out = family.outcome(r_zp).unwrap();
        let spread = out
            .conditional_state(cavom::Channel::Transmission)
            .unwrap()
            .displacement_variance();
        assert!(spread < previous, "r_zp = {r_zp}");
        previous = spread;
    }
}

#[test]
fn reflection_dip_sits_at_shifted_resonance() {
    let family = ResolutionFamily::new(0.01);
    let (params, drive) = family.point(0.02).unwrap();
    let psi = family.ground_state(0.02).unwrap();
    let g_om = cavom::model::optomechanical_coupling(&params, &drive).unwrap();
    // keep δ_0 fixed while scanning so g_om stays put
    let step = 0.01;
    let centre = -g_om * 0.5;
    let mut best = (f64::INFINITY, 0.0);
    for k in -200..=200 {
        let delta_c = centre + step * k as f64;
        let mut p = params;
        p.atom_cavity_detuning = delta_c - drive.delta_0(&params);
        let out = scatter_photon(&psi, &p, &DriveFrequency::new(delta_c)).unwrap();
        if out.probabilities.reflection < best.0 {
            best = (out.probabilities.reflection, delta_c);
        }
    }
    assert!((best.1 - centre).abs() <= step, "{best:?}");
}

#[test]
fn potentials_share_zero_crossings() {
    let mut params = Preset::FiberII.params();
    params.gamma = 0.0;
    params.drive_amplitude = 1.0;
    let drive = solve_resonant_drive(&params, 0.6).unwrap();
    let grid = PositionGrid::new(0.0, PI, 4096).unwrap();
    let v = cavom::quantum_potential(&params, &drive, &grid).unwrap();
    let sign_changes = |f: &[f64]| -> Vec<usize> {
        f.windows(2).enumerate().filter(|(_, w)| w[0] * w[1] < 0.0).map(|(i, _)| i).collect()
    };
    let a = sign_changes(&v.re_v);
    assert_eq!(a, sign_changes(&v.u_classical));
    assert_eq!(a.len(), 2);
}

#[test]
fn ground_state_heating_is_independent_of_form() {
    let (mut params, drive) = ResolutionFamily::new(0.05).point(0.3).unwrap();
    params.drive_amplitude = 0.1;
    let rho = MotionalDensityMatrix::ground(48, params.x0, params.eta_ld()).unwrap();
    let a = LindbladGenerator::scattering_jumps(&params, &drive, 48).unwrap().heating_rate(&rho);
    let b = LindbladGenerator::conventional(&params, &drive, 48).unwrap().heating_rate(&rho);
    assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
}

#[test]
fn momentum_kick_adds_phonons() {
    let eta = 0.1;
    let q = 2.0 / eta;
    let grid = PositionGrid::centered(FRAC_PI_4, 14.0 * eta, 4096).unwrap();
    let ground = ground_state(grid, FRAC_PI_4, eta).unwrap();
    let phase: Vec<Complex64> = grid.points().map(|x| Complex64::from_polar(1.0, q * x)).collect();
    let kicked = ground.multiplied(&phase);
    let spectral = phonon_expectation(&kicked).unwrap();
    let coeffs = fock_decomposition(&kicked, 200).unwrap();
    let oracle: f64 = coeffs.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum();
    assert!((oracle - 4.0).abs() < 1e-6, "{oracle}");
    assert!((spectral - oracle).abs() < 1e-6, "{spectral}");
}
